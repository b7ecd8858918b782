#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rsls/matrix.hpp"
#include "rsls/matrix_market.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(RSLS_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("rsls_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_identity(const fs::path& dir, std::size_t n) {
  const fs::path p = dir / "eye.mtx";
  rsls::mm_write(p, rsls::Matrix{rsls::DenseMatrix::identity(n)});
  return p;
}

}  // namespace

TEST_CASE("help and bad arguments") {
  CHECK(run("--help").code == 0);
  CHECK(run("frobnicate").code == 1);
  CHECK(run("solve /nonexistent/file.mtx").code == 1);
  CHECK(run("gen --family nope --m 10 --n 2").code == 1);
}

TEST_CASE("gen writes a matrix and a manifest") {
  const auto dir = scratch("gen");
  const Run r = run("--out " + dir.string() + " --seed 1 gen --family gaussian --m 300 --n 20 --name g");
  REQUIRE(r.code == 0);
  REQUIRE(fs::exists(dir / "g.mtx"));
  const json man = json::parse(slurp(dir / "g.json"));
  CHECK(man.at("rows") == 300);
  CHECK(man.at("cols") == 20);
  CHECK(man.at("params").at("family") == "gaussian");
  CHECK(man.at("seed") == 1);
  CHECK(man.at("solver").at("max_iter") == 100);
  CHECK(man.at("solver").at("sgs_sweeps") == 5);
  CHECK(man.at("sample_size") == 240);
  CHECK(json::parse(r.out) == man);
  const rsls::Matrix a = rsls::mm_read(dir / "g.mtx");
  CHECK(rsls::rows(a) == 300);
}

TEST_CASE("graph Laplacian pipeline has no zero columns") {
  const auto dir = scratch("graph");
  REQUIRE(run("--out " + dir.string() + " --seed 2 gen --family graph_laplacian --n 200 --name l")
              .code == 0);
  const json man = json::parse(slurp(dir / "l.json"));
  CHECK(man.at("params").contains("i0"));
  const rsls::Matrix a = rsls::mm_read(dir / "l.mtx");
  for (double c : rsls::column_norms(a)) CHECK(c > 0.0);
}

TEST_CASE("solve exit codes") {
  const auto dir = scratch("solve");
  const fs::path eye = write_identity(dir, 10);
  const Run ok = run("solve " + eye.string() + " --method pcg-rs --rhs ones");
  CHECK(ok.code == 0);
  const json rep = json::parse(ok.out);
  CHECK(rep.at("report").at("converged") == true);
  CHECK(rep.at("report").at("final_relres").get<double>() <= 1e-7);
  CHECK_FALSE(rep.contains("fit_error"));
  const Run fit = run("solve " + eye.string() + " --method pcg-rs");
  CHECK(json::parse(fit.out).at("fit_error").get<double>() <= 1e-6);

  REQUIRE(run("--out " + dir.string() + " --seed 4 gen --family udv --m 2000 --n 60 --cond 1000 --name u")
              .code == 0);
  const std::string udv = (dir / "u.mtx").string();
  CHECK(run("--max-iter 20 solve " + udv + " --method cg").code == 2);
  const Run rs = run("--out " + dir.string() + " solve " + udv + " --method pcg-rs --history");
  CHECK(rs.code == 0);
  const json saved = json::parse(slurp(dir / "solve_report.json"));
  CHECK(saved.at("report").contains("residual_history"));
  CHECK(run("solve " + udv + " --method lsqr").code == 1);
}

TEST_CASE("diag spectral on the identity") {
  const auto dir = scratch("diag");
  const fs::path eye = write_identity(dir, 6);
  const Run r = run("diag " + eye.string() + " --test spectral");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("result").at("kappa_normal") == 1.0);
}

TEST_CASE("diag filtered-gram writes two edge lists") {
  const auto dir = scratch("gram");
  REQUIRE(run("--out " + dir.string() + " gen --family sprand --m 2000 --n 40 --density 0.05 --cond 20 --name s")
              .code == 0);
  const Run r = run("--out " + dir.string() + " diag " + (dir / "s.mtx").string() +
                    " --test filtered-gram --theta 0.125 --prefix fig");
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "fig_full.tsv"));
  CHECK(fs::exists(dir / "fig_sampled.tsv"));
  const json j = json::parse(r.out);
  CHECK(j.at("result").at("theta") == 0.125);
}

TEST_CASE("bench writes CSV and Markdown") {
  const auto dir = scratch("bench");
  const fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"name": "tiny", "family": "gaussian", "repeats": 2,
                            "rows": [{"m": 300, "n": 15}, {"m": 500, "n": 20}]})";
  const Run r = run("--out " + dir.string() + " bench " + cfg.string());
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "tiny.csv");
  CHECK(csv == r.out);
  CHECK(csv.starts_with("n,m,nnz,kappa_normal,mu,"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  const std::string md = slurp(dir / "tiny.md");
  CHECK(md.find("Sum.RS") != std::string::npos);
}
