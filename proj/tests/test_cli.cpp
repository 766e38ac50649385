#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const fs::path out = fs::temp_directory_path() / "hswift_cli_out.txt";
  const std::string cmd = std::string(HSWIFT_CLI) + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hswift_cli";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("price the long-maturity stress rows with cp") {
  const Run r = run("price --params stress --quotes stress --backend cp --u-max 6");
  CHECK(r.code == 0);
  CHECK(r.out.find("65.565") != std::string::npos);
  CHECK(r.out.find("46.911") != std::string::npos);
  CHECK(r.out.find("27.197") != std::string::npos);
}

TEST_CASE("price with swift m = 3") {
  const Run r = run("price --params stress --quotes stress --backend swift --m 3 --json");
  CHECK(r.code == 0);
  CHECK(r.out.find("\"experiment\": \"price\"") != std::string::npos);
}

TEST_CASE("empty quote file") {
  const fs::path q = scratch("empty.csv");
  std::ofstream(q) << "spot = 1\n";
  const Run r = run("price --params target --quotes " + q.string());
  CHECK(r.code == 0);
}

TEST_CASE("malformed input exits 2 with the line") {
  const fs::path q = scratch("bad.csv");
  std::ofstream(q) << "spot = 1\nrate = 0\n0.5,1.0,call\n0.5,x,call\n";
  const Run r = run("calibrate --quotes " + q.string() + " --start target");
  CHECK(r.code == 2);
  CHECK(r.out.find("line 4") != std::string::npos);
  CHECK(run("price --params nonsense --quotes set2").code == 2);
  CHECK(run("price --params target --quotes set2 --chf-form heston").code == 2);
  CHECK(run("frobnicate").code == 2);
}

TEST_CASE("generate then calibrate") {
  const fs::path q = scratch("set2.csv");
  Run r = run("generate --params target --set set2 --out " + q.string());
  REQUIRE(r.code == 0);
  r = run("calibrate --quotes " + q.string() + " --start target-start");
  CHECK(r.code == 0);
  CHECK(r.out.find("ResidualTol") != std::string::npos);

  // stopped early: exit 4, or 0 with --allow-partial
  CHECK(run("calibrate --quotes " + q.string() + " --start target-start --max-iter 1").code == 4);
  CHECK(run("calibrate --quotes " + q.string() + " --start target-start --max-iter 1 --allow-partial")
            .code == 0);
}

TEST_CASE("generate on a grid") {
  const Run r = run("generate --params target --grid-tau 1 --grid-m 5 --grid-j 256");
  CHECK(r.code == 0);
  int lines = 0;
  std::istringstream in(r.out);
  for (std::string line; std::getline(in, line);) lines += line.find(",call,") != std::string::npos;
  CHECK(lines == 256);
}

TEST_CASE("numerical failure exits 3 with remedies") {
  const Run r = run("price --params stress --quotes stress --backend kswift --scale-tol 1e-300");
  CHECK(r.code == 3);
  CHECK(r.out.find("remedies") != std::string::npos);
}

TEST_CASE("fixture directory from the environment") {
  const fs::path dir = scratch("fx");
  REQUIRE(run("fixtures " + dir.string()).code == 0);
  std::ofstream(dir / "theta_mine.txt") << "kappa = 1\nv_bar = 0.04\nsigma = 0.5\nrho = -0.5\nv0 = 0.04\n";
  const Run without = run("price --params mine --quotes set1");
  CHECK(without.code == 2);
  CHECK(without.out.find("neither a parameter file") != std::string::npos);
  const std::string cmd = "HSWIFT_FIXTURES=" + dir.string() + " " + HSWIFT_CLI +
                          " price --params mine --quotes set1 > /dev/null";
  CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
}
