#include "spider/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "spider/numerics.hpp"

namespace spider {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int nearest_index(const std::vector<double>& nodes, double value) {
  if (value < nodes.front() - 1e-12 || value > nodes.back() + 1e-12) {
    throw std::out_of_range("slice value " + format_full(value) + " outside [" +
                            format_full(nodes.front()) + ", " + format_full(nodes.back()) +
                            "]");
  }
  int best = 0;
  double gap = std::abs(nodes[0] - value);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double g = std::abs(nodes[i] - value);
    if (g < gap) {
      gap = g;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

void write_solution_csv(const NetworkFunction& f, const std::string& path) {
  auto out = open_out(path);
  out << "ray,x,l,u\n";
  const Grid& grid = f.grid();
  for (int i = 0; i < f.ray_count(); ++i) {
    for (int k = 0; k <= grid.nl(); ++k) {
      for (int j = 0; j <= grid.nx(); ++j) {
        out << (i + 1) << ',' << format_full(grid.x_nodes[static_cast<std::size_t>(j)])
            << ',' << format_full(grid.l_levels[static_cast<std::size_t>(k)]) << ','
            << format_full(f(i, j, k)) << '\n';
      }
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

NetworkFunction load_solution_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "ray,x,l,u") {
    throw std::runtime_error(path + ": expected header 'ray,x,l,u'");
  }
  struct Row {
    int ray;
    double x, l, u;
  };
  std::vector<Row> rows;
  std::set<double> xs, ls;
  int rays = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    Row row;
    char c1, c2, c3;
    if (!(ss >> row.ray >> c1 >> row.x >> c2 >> row.l >> c3 >> row.u) || c1 != ',' ||
        c2 != ',' || c3 != ',') {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed row");
    }
    rays = std::max(rays, row.ray);
    xs.insert(row.x);
    ls.insert(row.l);
    rows.push_back(row);
  }
  if (rays < 1 || xs.size() < 2 || ls.size() < 1) {
    throw std::runtime_error(path + ": no grid content");
  }
  Network net;
  net.ray_count = std::max(rays, 2);
  net.ray_length = *xs.rbegin();
  net.local_time_bound = *ls.rbegin();
  Grid grid;
  grid.network = net;
  grid.network.ray_count = rays;
  grid.x_nodes.assign(xs.begin(), xs.end());
  grid.l_levels.assign(ls.begin(), ls.end());
  grid.dx = grid.x_nodes.size() > 1 ? grid.x_nodes[1] - grid.x_nodes[0] : 0.0;
  grid.dl = grid.l_levels.size() > 1 ? grid.l_levels[1] - grid.l_levels[0] : 0.0;

  std::map<double, int> x_index, l_index;
  int idx = 0;
  for (double x : xs) x_index[x] = idx++;
  idx = 0;
  for (double l : ls) l_index[l] = idx++;

  NetworkFunction f(grid);
  for (const Row& row : rows) {
    f.set(row.ray - 1, x_index[row.x], l_index[row.l], row.u);
  }
  // The shared vertex value comes from ray 1's x = 0 rows.
  for (const auto& [l, k] : l_index) {
    (void)l;
    const double v = f(0, 0, k);
    for (int i = 1; i < rays; ++i) {
      if (f(i, 0, k) != v) {
        throw std::runtime_error(path + ": vertex rows disagree across rays");
      }
    }
    f.set_vertex(k, v);
  }
  return f;
}

void write_solution_json(const NetworkFunction& f, const std::string& path) {
  const Grid& grid = f.grid();
  nlohmann::json doc;
  doc["network"] = {{"ray_count", grid.network.ray_count},
                    {"ray_length", grid.network.ray_length},
                    {"local_time_bound", grid.network.local_time_bound},
                    {"unbounded_local_time", grid.network.unbounded_local_time}};
  doc["grid"] = {{"nx", grid.nx()},
                 {"nl", grid.nl()},
                 {"x_nodes", grid.x_nodes},
                 {"l_levels", grid.l_levels}};
  doc["vertex_values"] = f.vertex_values();
  nlohmann::json values = nlohmann::json::array();
  for (int i = 0; i < f.ray_count(); ++i) {
    nlohmann::json per_ray = nlohmann::json::array();
    for (int k = 0; k <= grid.nl(); ++k) {
      nlohmann::json row = nlohmann::json::array();
      for (int j = 0; j <= grid.nx(); ++j) row.push_back(f(i, j, k));
      per_ray.push_back(std::move(row));
    }
    values.push_back(std::move(per_ray));
  }
  doc["values"] = std::move(values);
  auto out = open_out(path);
  out << doc.dump(1) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

NetworkFunction load_solution_json(const std::string& path) {
  auto in = open_in(path);
  nlohmann::json doc;
  in >> doc;
  Network net;
  net.ray_count = doc.at("network").at("ray_count").get<int>();
  net.ray_length = doc.at("network").at("ray_length").get<double>();
  net.local_time_bound = doc.at("network").at("local_time_bound").get<double>();
  net.unbounded_local_time = doc.at("network").value("unbounded_local_time", false);
  Grid grid;
  grid.network = net;
  grid.x_nodes = doc.at("grid").at("x_nodes").get<std::vector<double>>();
  grid.l_levels = doc.at("grid").at("l_levels").get<std::vector<double>>();
  grid.dx = grid.x_nodes.size() > 1 ? grid.x_nodes[1] - grid.x_nodes[0] : 0.0;
  grid.dl = grid.l_levels.size() > 1 ? grid.l_levels[1] - grid.l_levels[0] : 0.0;
  NetworkFunction f(grid);
  const auto& values = doc.at("values");
  for (int i = 0; i < net.ray_count; ++i) {
    for (std::size_t k = 0; k < grid.l_levels.size(); ++k) {
      for (std::size_t j = 0; j < grid.x_nodes.size(); ++j) {
        f.set(i, static_cast<int>(j), static_cast<int>(k),
              values.at(static_cast<std::size_t>(i)).at(k).at(j).get<double>());
      }
    }
  }
  const auto vertex = doc.at("vertex_values").get<std::vector<double>>();
  for (std::size_t k = 0; k < vertex.size(); ++k) {
    f.set_vertex(static_cast<int>(k), vertex[k]);
  }
  return f;
}

void write_solution(const NetworkFunction& f, const std::string& path) {
  if (has_suffix(path, ".csv")) {
    write_solution_csv(f, path);
  } else if (has_suffix(path, ".json")) {
    write_solution_json(f, path);
  } else {
    throw std::invalid_argument("solution path must end in .csv or .json: " + path);
  }
}

NetworkFunction load_solution(const std::string& path) {
  if (has_suffix(path, ".csv")) return load_solution_csv(path);
  if (has_suffix(path, ".json")) return load_solution_json(path);
  throw std::invalid_argument("solution path must end in .csv or .json: " + path);
}

void export_plot_data(const NetworkFunction& f, const SliceSpec& slice,
                      const std::string& path) {
  const Grid& grid = f.grid();
  auto out = open_out(path);
  switch (slice.kind) {
    case SliceKind::kVertexLine: {
      out << "# l\tu\n";
      for (int k = 0; k <= grid.nl(); ++k) {
        out << format_full(grid.l_levels[static_cast<std::size_t>(k)]) << '\t'
            << format_full(f.vertex(k)) << '\n';
      }
      break;
    }
    case SliceKind::kFixedL: {
      if (slice.ray < 0 || slice.ray >= f.ray_count()) {
        throw std::out_of_range("slice ray out of range");
      }
      const int k = nearest_index(grid.l_levels, slice.value);
      out << "# x\tu\n";
      for (int j = 0; j <= grid.nx(); ++j) {
        out << format_full(grid.x_nodes[static_cast<std::size_t>(j)]) << '\t'
            << format_full(f(slice.ray, j, k)) << '\n';
      }
      break;
    }
    case SliceKind::kFixedX: {
      if (slice.ray < 0 || slice.ray >= f.ray_count()) {
        throw std::out_of_range("slice ray out of range");
      }
      const int j = nearest_index(grid.x_nodes, slice.value);
      out << "# l\tu\n";
      for (int k = 0; k <= grid.nl(); ++k) {
        out << format_full(grid.l_levels[static_cast<std::size_t>(k)]) << '\t'
            << format_full(f(slice.ray, j, k)) << '\n';
      }
      break;
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void RunConfig::validate() const {
  auto bad = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (nx < 2) bad("nx must be >= 2 (got " + std::to_string(nx) + ")");
  if (nl < 1) bad("nl must be >= 1 (got " + std::to_string(nl) + ")");
  if (!(tol > 0.0)) bad("tol must be > 0");
  if (samples < 2) bad("samples must be >= 2");
  if (trials < 1) bad("trials must be >= 1");
  if (delta < 0.0) bad("delta must be >= 0");
  if (paths < 2) bad("paths must be >= 2");
  if (!(dt > 0.0)) bad("dt must be > 0");
  if (!(horizon > 0.0)) bad("T must be > 0");
  if (threads < 0) bad("threads must be >= 0");
  for (std::size_t i = 1; i < eps_schedule.size(); ++i) {
    if (!(eps_schedule[i] < eps_schedule[i - 1])) bad("eps schedule must strictly decrease");
  }
  for (double e : eps_schedule) {
    if (!(e > 0.0)) bad("eps values must be > 0");
  }
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    if (piece.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(piece, &used);
    while (used < piece.size() && std::isspace(static_cast<unsigned char>(piece[used]))) {
      ++used;
    }
    if (used != piece.size()) throw std::invalid_argument("bad number in list: " + piece);
    out.push_back(v);
  }
  return out;
}

RunConfig parse_run_config_file(const std::string& path, RunConfig base) {
  auto in = open_in(path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    auto trim = [](std::string s) {
      const std::size_t b = s.find_first_not_of(" \t\r");
      const std::size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "command") base.command = value;
      else if (key == "problem") base.problem_path = value;
      else if (key == "out") base.out_path = value;
      else if (key == "report") base.report_path = value;
      else if (key == "spec") base.spec_path = value;
      else if (key == "schedule") base.schedule_path = value;
      else if (key == "nx") base.nx = std::stoi(value);
      else if (key == "nl") base.nl = std::stoi(value);
      else if (key == "tol") base.tol = std::stod(value);
      else if (key == "samples") base.samples = std::stoi(value);
      else if (key == "trials") base.trials = std::stoi(value);
      else if (key == "delta") base.delta = std::stod(value);
      else if (key == "seed") base.seed = std::stoull(value);
      else if (key == "paths") base.paths = std::stoi(value);
      else if (key == "dt") base.dt = std::stod(value);
      else if (key == "T") base.horizon = std::stod(value);
      else if (key == "eps") base.eps_schedule = parse_double_list(value);
      else if (key == "threads") base.threads = std::stoi(value);
      else {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key '" +
                                 key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad value for '" +
                               key + "': '" + value + "'");
    }
  }
  return base;
}

void write_run_config(const RunConfig& config, const std::string& path) {
  auto out = open_out(path);
  if (!config.command.empty()) out << "command = " << config.command << '\n';
  if (!config.problem_path.empty()) out << "problem = " << config.problem_path << '\n';
  if (!config.out_path.empty()) out << "out = " << config.out_path << '\n';
  if (!config.report_path.empty()) out << "report = " << config.report_path << '\n';
  if (!config.spec_path.empty()) out << "spec = " << config.spec_path << '\n';
  if (!config.schedule_path.empty()) out << "schedule = " << config.schedule_path << '\n';
  out << "nx = " << config.nx << '\n';
  out << "nl = " << config.nl << '\n';
  out << "tol = " << format_full(config.tol) << '\n';
  out << "samples = " << config.samples << '\n';
  out << "trials = " << config.trials << '\n';
  out << "delta = " << format_full(config.delta) << '\n';
  out << "seed = " << config.seed << '\n';
  out << "paths = " << config.paths << '\n';
  out << "dt = " << format_full(config.dt) << '\n';
  out << "T = " << format_full(config.horizon) << '\n';
  if (!config.eps_schedule.empty()) {
    out << "eps = ";
    for (std::size_t i = 0; i < config.eps_schedule.size(); ++i) {
      out << (i ? "," : "") << format_full(config.eps_schedule[i]);
    }
    out << '\n';
  }
  out << "threads = " << config.threads << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace spider
