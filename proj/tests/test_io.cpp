#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spider/io.hpp"

using namespace spider;

namespace {

NetworkFunction sample_function() {
  Grid grid = build_grid(Network{2, 1.0, 0.5}, 5, 3);
  NetworkFunction f(grid);
  for (int k = 0; k <= 3; ++k) f.set_vertex(k, std::sin(0.7 * k) / 3.0);
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k <= 3; ++k) {
      for (int j = 1; j <= 5; ++j) {
        f.set(i, j, k, std::cos(i + 0.3 * j) * std::exp(-0.1 * k) / 7.0);
      }
    }
  }
  return f;
}

std::string temp_path(const std::string& name) {
  return std::string("io_test_") + name;
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("CSV round trip is lossless") {
  NetworkFunction f = sample_function();
  const std::string path = temp_path("a.csv");
  write_solution(f, path);
  NetworkFunction g = load_solution(path);
  auto cmp = compare_pointwise(f, g);
  CHECK(cmp.min_difference == 0.0);
  CHECK(cmp.max_difference == 0.0);
  CHECK(g.vertex_values() == f.vertex_values());
  std::remove(path.c_str());
}

TEST_CASE("CSV header contract") {
  NetworkFunction f = sample_function();
  const std::string path = temp_path("b.csv");
  write_solution_csv(f, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "ray,x,l,u");
  // Rows sorted by (ray, l, x): first data row is ray 1, l = 0, x = 0.
  std::string first;
  std::getline(in, first);
  CHECK(first.substr(0, 4) == "1,0,");
  std::remove(path.c_str());
}

TEST_CASE("JSON round trip and structure") {
  NetworkFunction f = sample_function();
  const std::string path = temp_path("c.json");
  write_solution(f, path);
  NetworkFunction g = load_solution(path);
  auto cmp = compare_pointwise(f, g);
  CHECK(cmp.min_difference == 0.0);
  CHECK(cmp.max_difference == 0.0);

  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  for (const char* key : {"\"network\"", "\"grid\"", "\"values\"", "\"vertex_values\"",
                          "\"ray_count\"", "\"x_nodes\""}) {
    CHECK(text.find(key) != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("unknown extension is rejected") {
  NetworkFunction f = sample_function();
  CHECK_THROWS_AS(write_solution(f, "sol.txt"), std::invalid_argument);
  CHECK_THROWS_AS(load_solution("sol.txt"), std::invalid_argument);
}

TEST_CASE("plot export shapes") {
  NetworkFunction f = sample_function();
  const std::string path = temp_path("d.tsv");

  auto count_rows = [&](const SliceSpec& spec) {
    export_plot_data(f, spec, path);
    std::ifstream in(path);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] != '#') ++rows;
    }
    return rows;
  };

  CHECK(count_rows({SliceKind::kVertexLine, 0, 0.0}) == 4);   // nl + 1
  CHECK(count_rows({SliceKind::kFixedL, 1, 0.25}) == 6);      // nx + 1
  CHECK(count_rows({SliceKind::kFixedX, 0, 0.4}) == 4);
  CHECK_THROWS_AS(count_rows({SliceKind::kFixedL, 0, 2.0}), std::out_of_range);
  CHECK_THROWS_AS(count_rows({SliceKind::kFixedL, 5, 0.2}), std::out_of_range);
  std::remove(path.c_str());
}

TEST_CASE("run config validation names the field") {
  RunConfig config;
  config.nx = 0;
  CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("nx"), std::invalid_argument);
  config = {};
  config.dt = -1.0;
  CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("dt"), std::invalid_argument);
  config = {};
  config.eps_schedule = {0.1, 0.2};
  CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("eps"), std::invalid_argument);
}

TEST_CASE("run config defaults") {
  RunConfig config;
  CHECK(config.tol == 1e-8);
  CHECK(config.nx == 200);
  CHECK(config.nl == 200);
  config.validate();
}

TEST_CASE("run config file round trip is idempotent") {
  RunConfig config;
  config.command = "solve";
  config.problem_path = "p.cfg";
  config.nx = 123;
  config.tol = 1e-10;
  config.eps_schedule = {0.2, 0.1, 0.05};
  config.seed = 42;
  const std::string path = temp_path("e.cfg");
  write_run_config(config, path);
  RunConfig loaded = parse_run_config_file(path);
  write_run_config(loaded, path + "2");

  std::ifstream a(path), b(path + "2");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(loaded.nx == 123);
  CHECK(loaded.tol == 1e-10);
  CHECK(loaded.eps_schedule == config.eps_schedule);
  std::remove(path.c_str());
  std::remove((path + "2").c_str());
}

TEST_CASE("run config file errors") {
  const std::string path = temp_path("f.cfg");
  {
    std::ofstream out(path);
    out << "nx = 50\nbogus = 1\n";
  }
  CHECK_THROWS_WITH_AS(parse_run_config_file(path), doctest::Contains("unknown key"),
                       std::runtime_error);
  {
    std::ofstream out(path);
    out << "nx = fifty\n";
  }
  CHECK_THROWS_WITH_AS(parse_run_config_file(path), doctest::Contains("bad value"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_SUITE_END();
