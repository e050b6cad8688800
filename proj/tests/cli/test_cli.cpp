#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "eitrec/io.hpp"
#include "eitrec/mesh.hpp"
#include "helpers.hpp"

using namespace eit;
namespace fs = std::filesystem;

namespace {

const std::string kCli = EITREC_CLI_PATH;

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run(const std::string& args, const fs::path& dir) {
  const std::string out_path = (dir / "stdout.txt").string();
  const std::string err_path = (dir / "stderr.txt").string();
  const std::string cmd = kCli + " " + args + " >" + out_path + " 2>" + err_path;
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = test::read_bytes(out_path);
  r.err = test::read_bytes(err_path);
  return r;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("mesh command writes a readable mesh") {
  test::TempDir dir("cli_mesh");
  const auto r = run("mesh --h 0.1 --out " + dir.file("disk.txt"), dir.path);
  CHECK(r.code == 0);
  const TriMesh m = read_mesh(dir.file("disk.txt"), MeshFormat::native);
  CHECK(m.vertex_count() > 100);
}

TEST_CASE("mesh command produces conforming shape meshes") {
  test::TempDir dir("cli_mesh_shape");
  const auto r =
      run("mesh --h 0.07 --shape \"ellipse 0 0 0.4 0.2 0\" --out " + dir.file("gen.txt"),
          dir.path);
  CHECK(r.code == 0);
  const TriMesh m = read_mesh(dir.file("gen.txt"), MeshFormat::native);
  CHECK(conforms_to_shape(m, ShapeSpec::default_ellipse()));
}

TEST_CASE("mesh command rejects bad flags with exit code 2") {
  test::TempDir dir("cli_mesh_bad");
  CHECK(run("mesh --h -1 --out " + dir.file("x.txt"), dir.path).code == 2);
  CHECK(run("mesh --h 1.5 --out " + dir.file("x.txt"), dir.path).code == 2);
  CHECK(run("mesh --h 0.1", dir.path).code == 2);  // missing --out
  CHECK(run("bogus-subcommand", dir.path).code == 2);
}

TEST_CASE("simulate is deterministic and honors eps=0") {
  test::TempDir dir("cli_sim");
  REQUIRE(run("mesh --h 0.09 --shape \"ellipse 0 0 0.4 0.2 0\" --out " + dir.file("gen.txt"),
              dir.path)
              .code == 0);
  const std::string base = "simulate --mesh " + dir.file("gen.txt") +
                           " --shape \"ellipse 0 0 0.4 0.2 0\" --E 6 --seed 7 --out ";
  REQUIRE(run(base + dir.file("d1") + " --eps 0.01", dir.path).code == 0);
  REQUIRE(run(base + dir.file("d2") + " --eps 0.01", dir.path).code == 0);
  for (const char* name : {"m_001.csv", "m_002.csv", "m_003.csv", "mt_001.csv", "mt_002.csv",
                           "mt_003.csv", "meta.txt"})
    CHECK(test::read_bytes(dir.file("d1") + "/" + name) ==
          test::read_bytes(dir.file("d2") + "/" + name));

  REQUIRE(run(base + dir.file("d0") + " --eps 0", dir.path).code == 0);
  CHECK(test::read_bytes(dir.file("d0") + "/m_001.csv") ==
        test::read_bytes(dir.file("d0") + "/mt_001.csv"));
}

TEST_CASE("reconstruct writes results, snapshots and metadata") {
  test::TempDir dir("cli_rec");
  REQUIRE(run("mesh --h 0.09 --shape \"ellipse 0 0 0.4 0.2 0\" --out " + dir.file("gen.txt"),
              dir.path)
              .code == 0);
  REQUIRE(run("simulate --mesh " + dir.file("gen.txt") +
                  " --shape \"ellipse 0 0 0.4 0.2 0\" --E 2 --eps 0.01 --seed 3 --out " +
                  dir.file("data"),
              dir.path)
              .code == 0);
  REQUIRE(run("mesh --h 0.12 --out " + dir.file("recon.txt"), dir.path).code == 0);

  const auto r = run("reconstruct --data " + dir.file("data") + " --mesh " +
                         dir.file("recon.txt") + " --K 12 --snapshots 1,10 --truth auto --out " +
                         dir.file("result"),
                     dir.path);
  CHECK(r.code == 0);
  for (const char* name : {"convergence.csv", "q.vtk", "H.vtk", "sigma.vtk", "f.vtk",
                           "lambda.vtk", "run.txt"})
    CHECK(fs::exists(dir.file("result") + "/" + std::string(name)));

  int snapshot_sets = 0;
  for (const auto& entry : fs::directory_iterator(dir.file("result"))) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("snap_", 0) == 0 && name.find("_H.vtk") != std::string::npos) ++snapshot_sets;
  }
  CHECK(snapshot_sets == 2);

  const auto meta = read_keyvalues(dir.file("result") + "/run.txt");
  CHECK(meta.at("M") == "1");
  CHECK(meta.count("eps_err") == 1);
  const ConvergenceRecord record = read_convergence_csv(dir.file("result") + "/convergence.csv");
  CHECK(!record.rows.empty());
}

TEST_CASE("reconstruct refuses the inverse crime without the override") {
  test::TempDir dir("cli_crime");
  REQUIRE(run("mesh --h 0.1 --shape \"circles 0 0 0.3\" --out " + dir.file("gen.txt"), dir.path)
              .code == 0);
  REQUIRE(run("simulate --mesh " + dir.file("gen.txt") +
                  " --shape \"circles 0 0 0.3\" --E 2 --eps 0 --seed 1 --out " + dir.file("data"),
              dir.path)
              .code == 0);
  const std::string args = "reconstruct --data " + dir.file("data") + " --mesh " +
                           dir.file("gen.txt") + " --K 1 --out " + dir.file("result");
  const auto refused = run(args, dir.path);
  CHECK(refused.code == 1);
  CHECK(refused.err.find("inverse crime") != std::string::npos);
  CHECK(run(args + " --allow-inverse-crime", dir.path).code == 0);
}

TEST_CASE("reconstruct without required flags exits with 2") {
  test::TempDir dir("cli_rec_bad");
  CHECK(run("reconstruct --data somewhere --out x", dir.path).code == 2);
}

TEST_CASE("evaluate tabulates result directories sorted by M and gamma") {
  test::TempDir dir("cli_eval");
  // two fake result dirs
  fs::create_directories(dir.file("r1"));
  fs::create_directories(dir.file("r2"));
  write_keyvalues(dir.file("r1") + "/run.txt",
                  {{"M", "3"}, {"gamma", "0.001"}, {"iterations", "54"},
                   {"J_final", "4.58e-07"}, {"eps_err", "0.101"}});
  write_keyvalues(dir.file("r2") + "/run.txt",
                  {{"M", "1"}, {"gamma", "0.002"}, {"iterations", "351"},
                   {"J_final", "1.205e-07"}, {"eps_err", "0.232"}});

  const auto r = run("evaluate " + dir.file("r1") + " " + dir.file("r2") + " " + dir.file("r1"),
                     dir.path);
  CHECK(r.code == 0);
  CHECK(r.err.find("duplicate") != std::string::npos);
  const std::string expected =
      "M,gamma,iterations,J_final,eps_err\n"
      "1,0.002,351,1.205e-07,0.232\n"
      "3,0.001,54,4.58e-07,0.101\n";
  CHECK(r.out == expected);

  CHECK(run("evaluate", dir.path).code == 2);
}

TEST_CASE("config files merge under explicit flags") {
  test::TempDir dir("cli_cfg");
  REQUIRE(run("mesh --h 0.1 --shape \"circles 0 0 0.3\" --out " + dir.file("gen.txt"), dir.path)
              .code == 0);
  REQUIRE(run("simulate --mesh " + dir.file("gen.txt") +
                  " --shape \"circles 0 0 0.3\" --E 2 --eps 0 --seed 1 --out " + dir.file("data"),
              dir.path)
              .code == 0);
  REQUIRE(run("mesh --h 0.13 --out " + dir.file("recon.txt"), dir.path).code == 0);

  std::ofstream(dir.file("run.cfg")) << "gamma = 0.002\nK = 3\ndataset = " << dir.file("data")
                                     << "\nrecon_mesh = " << dir.file("recon.txt") << "\n";
  const auto r = run("reconstruct --config " + dir.file("run.cfg") + " --gamma 0.004 --out " +
                         dir.file("result"),
                     dir.path);
  CHECK(r.code == 0);
  const auto meta = read_keyvalues(dir.file("result") + "/run.txt");
  CHECK(meta.at("gamma") == "0.004");  // flag wins over the config file

  std::ofstream(dir.file("bad.cfg")) << "gamma = 0.002\nmystery_knob = 7\n";
  const auto bad = run("reconstruct --config " + dir.file("bad.cfg") + " --out x", dir.path);
  CHECK(bad.code == 1);
  CHECK(bad.err.find("mystery_knob") != std::string::npos);
  CHECK(bad.err.find("line 2") != std::string::npos);
}

}  // TEST_SUITE
