#include <doctest.h>

#include <fstream>
#include <sstream>

#include "eitrec/io.hpp"
#include "helpers.hpp"

using namespace eit;

TEST_SUITE("io") {

TEST_CASE("vtk writer emits a well-formed unstructured grid") {
  test::TempDir dir("vtk");
  auto mesh = test::disk(0.2);
  const NodalField field(mesh, 1.0);
  const std::string path = dir.file("const.vtk");
  write_vtk(field, "sigma", path);

  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "# vtk DataFile Version 3.0");
  int points = -1, cells = -1, point_data = -1;
  double vmin = 1e300, vmax = -1e300;
  bool in_scalars = false;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "POINTS") ss >> points;
    if (word == "CELLS") ss >> cells;
    if (word == "POINT_DATA") ss >> point_data;
    if (in_scalars && !word.empty() && word != "LOOKUP_TABLE") {
      const double v = std::stod(word);
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
    if (word == "LOOKUP_TABLE") in_scalars = true;
    if (word == "SCALARS") {
      std::string name;
      ss >> name;
      CHECK(name == "sigma");
    }
  }
  CHECK(points == mesh->vertex_count());
  CHECK(cells == mesh->triangle_count());
  CHECK(point_data == mesh->vertex_count());
  CHECK(vmin == 1.0);
  CHECK(vmax == 1.0);
}

TEST_CASE("boundary csv round trip is exact") {
  test::TempDir dir("csv");
  BoundaryData data;
  data.angles = {0.1, 1.7, 3.9, 5.2};
  data.values = {1.0 / 3.0, -2.123456789012345e-7, 0.0, 9.87e12};
  const std::string path = dir.file("m.csv");
  write_boundary_csv(data, path);
  const BoundaryData back = read_boundary_csv(path);
  CHECK(back.angles == data.angles);
  CHECK(back.values == data.values);
}

TEST_CASE("boundary csv rejects malformed input") {
  test::TempDir dir("csv_bad");
  const std::string path = dir.file("bad.csv");
  std::ofstream(path) << "angle,value\n0.5;1.0\n";
  CHECK_THROWS_AS(read_boundary_csv(path), ParseError);
  std::ofstream(path) << "wrong,header\n";
  CHECK_THROWS_AS(read_boundary_csv(path), ParseError);
}

TEST_CASE("convergence csv round trip") {
  ConvergenceRecord record;
  record.reason = StopReason::converged;
  for (int k = 0; k < 3; ++k) {
    IterationRow row;
    row.iter = k;
    row.J = 1.0 / (k + 1);
    row.grad_inf = 0.1 / (k + 1);
    row.step = k == 2 ? 0.0 : 0.5;
    row.backtracks = k;
    if (k > 0) row.eps_err = 0.3 - 0.1 * k;
    record.rows.push_back(row);
  }
  test::TempDir dir("conv");
  const std::string path = dir.file("convergence.csv");
  write_convergence_csv(record, path);
  const ConvergenceRecord back = read_convergence_csv(path);
  CHECK(back.reason == StopReason::converged);
  REQUIRE(back.rows.size() == 3);
  CHECK(back.rows[1].eps_err.has_value());
  CHECK(!back.rows[0].eps_err.has_value());
  CHECK(back.rows[2].J == record.rows[2].J);
  CHECK(convergence_csv(back) == convergence_csv(record));
}

TEST_CASE("key-value files") {
  test::TempDir dir("kv");
  const std::string path = dir.file("meta.txt");
  write_keyvalues(path, {{"E", "6"}, {"shape", "ellipse 0 0 0.4 0.2 0"}});
  const auto kv = read_keyvalues(path);
  CHECK(kv.at("E") == "6");
  CHECK(kv.at("shape") == "ellipse 0 0 0.4 0.2 0");
}

TEST_CASE("config parser accepts known keys and comments") {
  test::TempDir dir("cfg");
  const std::string path = dir.file("run.cfg");
  std::ofstream(path) << "# experiment configuration\n"
                      << "gamma = 0.001\n"
                      << "\n"
                      << "alpha = 0.01  # transition width\n";
  const auto kv = parse_config_file(path, {"gamma", "alpha"});
  CHECK(kv.at("gamma") == "0.001");
  CHECK(kv.at("alpha") == "0.01");
}

TEST_CASE("config parser rejects unknown keys with the line number") {
  test::TempDir dir("cfg_bad");
  const std::string path = dir.file("run.cfg");
  std::ofstream(path) << "gamma = 0.001\nbogus = 1\n";
  try {
    parse_config_file(path, {"gamma"});
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
}

TEST_CASE("matrix coordinate dump") {
  std::vector<Triplet> trips = {{0, 0, 1.5}, {1, 0, -2.0}, {1, 1, 3.0}};
  const SparseMatrix A = SparseMatrix::from_triplets(2, std::move(trips));
  CHECK(A.dump_coordinate_text() == "0 0 1.5\n1 0 -2\n1 1 3\n");
}

}  // TEST_SUITE
