#include "ael/config.h"

#include "ael/io.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

namespace ael {

namespace {

std::string trim_ws(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream ss(s);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
  try {
    size_t used = 0;
    out = std::stoull(s, &used);
    return used == s.size();
  } catch (...) {
    return false;
  }
}

bool parse_int(const std::string& s, int& out) {
  try {
    size_t used = 0;
    out = std::stoi(s, &used);
    return used == s.size();
  } catch (...) {
    return false;
  }
}

bool parse_double(const std::string& s, double& out) {
  try {
    size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size();
  } catch (...) {
    return false;
  }
}

std::string join_path(const std::string& dir, const std::string& file) {
  if (dir.empty() || file.empty() || file.front() == '/') return file;
  if (dir.back() == '/') return dir + file;
  return dir + "/" + file;
}

}  // namespace

PopulationSpec parse_population(const std::string& id) {
  if (id == "normal") return NormalPop{0.0, 1.0};
  if (id == "exp1") return ExponentialPop{1.0, false};
  if (id == "mixture") return MixturePop{};
  if (id == "chisq1") return ChiSquarePop{1.0};
  if (id == "linreg-normal") return LinRegPop{Vector::Ones(2), true};
  if (id == "linreg-exp") return LinRegPop{Vector::Ones(2), false};
  if (id.rfind("latent-", 0) == 0 && id.size() == 10 && id[7] >= 'a' &&
      id[7] <= 'd' && id[8] == '-' && id[9] >= '2' && id[9] <= '3')
    return LatentDPop{id[7], id[9] - '0'};
  if (id.rfind("asset-", 0) == 0) {
    int q = 0;
    if (parse_int(id.substr(6), q) && q >= 2) return AssetPop{q};
  }
  throw InputError("unknown population: " + id);
}

ExperimentConfig parse_config(const std::string& text,
                              const std::string& base_dir) {
  ExperimentConfig config;
  std::vector<std::string> problems;
  std::vector<std::pair<std::string, int>> cells;  // (population id, n)

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool in_cell = false;
  std::string cell_pop;
  int cell_n = 0;

  auto flush_cell = [&] {
    if (!in_cell) return;
    if (cell_pop.empty())
      problems.push_back("cell without a population");
    else if (cell_n <= 0)
      problems.push_back("cell '" + cell_pop + "' without a valid n");
    else
      cells.emplace_back(cell_pop, cell_n);
    cell_pop.clear();
    cell_n = 0;
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim_ws(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";

    if (line == "[cell]") {
      flush_cell();
      in_cell = true;
      continue;
    }
    if (line.front() == '[') {
      problems.push_back(where + "unknown section " + line);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back(where + "expected key = value");
      continue;
    }
    const std::string key = trim_ws(line.substr(0, eq));
    const std::string value = trim_ws(line.substr(eq + 1));

    if (in_cell) {
      if (key == "population") {
        cell_pop = value;
      } else if (key == "n") {
        if (!parse_int(value, cell_n)) problems.push_back(where + "bad n");
      } else {
        problems.push_back(where + "unknown cell key: " + key);
      }
      continue;
    }

    if (key == "kind") {
      if (value != "coverage" && value != "bartlett")
        problems.push_back(where + "kind must be coverage or bartlett");
      else
        config.kind = value;
    } else if (key == "master_seed") {
      if (!parse_u64(value, config.sim.master_seed))
        problems.push_back(where + "bad master_seed");
    } else if (key == "replications") {
      if (!parse_int(value, config.sim.replications))
        problems.push_back(where + "bad replications");
    } else if (key == "threads") {
      if (!parse_int(value, config.sim.threads))
        problems.push_back(where + "bad threads");
    } else if (key == "levels") {
      config.sim.levels.clear();
      for (const auto& tok : split_ws(value)) {
        double level = 0.0;
        if (!parse_double(tok, level)) {
          problems.push_back(where + "bad level: " + tok);
          continue;
        }
        if (level > 1.0) level /= 100.0;
        config.sim.levels.push_back(level);
      }
    } else if (key == "methods") {
      config.sim.methods.clear();
      for (const auto& tok : split_ws(value)) {
        try {
          config.sim.methods.push_back(parse_method(tok));
        } catch (const InputError& e) {
          problems.push_back(where + e.what());
        }
      }
    } else if (key == "boot_B") {
      if (!parse_int(value, config.sim.bootstrap_B))
        problems.push_back(where + "bad boot_B");
    } else if (key == "offline_b") {
      double b = 0.0;
      if (!parse_double(value, b))
        problems.push_back(where + "bad offline_b");
      else
        config.sim.offline_b = b;
    } else if (key == "trim") {
      if (!parse_int(value, config.sim.trim))
        problems.push_back(where + "bad trim");
    } else if (key == "oracle_draws") {
      std::uint64_t draws = 0;
      if (!parse_u64(value, draws))
        problems.push_back(where + "bad oracle_draws");
      else
        config.sim.oracle_draws = static_cast<long long>(draws);
    } else if (key == "design_file") {
      config.design_file = value;
    } else if (key == "out") {
      config.out_path = value;
    } else if (key == "format") {
      if (value != "csv" && value != "table")
        problems.push_back(where + "format must be csv or table");
      else
        config.format = value;
    } else {
      problems.push_back(where + "unknown key: " + key);
    }
  }
  flush_cell();

  if (cells.empty()) problems.push_back("no [cell] sections");
  for (const auto& [pop_id, n] : cells) {
    try {
      const PopulationSpec spec = parse_population(pop_id);
      int index = -1;
      for (size_t i = 0; i < config.sim.populations.size(); ++i)
        if (config.sim.populations[i].id == pop_id) index = static_cast<int>(i);
      if (index < 0) {
        index = static_cast<int>(config.sim.populations.size());
        config.sim.populations.push_back({pop_id, spec});
      }
      config.sim.cells.push_back({index, n});
    } catch (const InputError& e) {
      problems.push_back(e.what());
    }
  }

  const bool needs_design =
      std::any_of(config.sim.populations.begin(), config.sim.populations.end(),
                  [](const PopulationEntry& p) {
                    return std::holds_alternative<LinRegPop>(p.spec);
                  });
  if (needs_design) {
    if (config.design_file.empty()) {
      problems.push_back("regression cells require design_file");
    } else {
      try {
        config.sim.design =
            read_matrix_file(join_path(base_dir, config.design_file));
      } catch (const InputError& e) {
        problems.push_back(e.what());
      }
    }
  }

  if (!problems.empty()) {
    std::string msg = "config problems:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw InputError(msg);
  }
  return config;
}

ExperimentConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto slash = path.find_last_of('/');
  const std::string dir = (slash == std::string::npos) ? "" : path.substr(0, slash);
  return parse_config(buf.str(), dir);
}

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "kind = " << config.kind << '\n';
  out << "master_seed = " << config.sim.master_seed << '\n';
  out << "replications = " << config.sim.replications << '\n';
  out << "threads = " << config.sim.threads << '\n';
  if (!config.sim.levels.empty()) {
    out << "levels =";
    for (double level : config.sim.levels) out << ' ' << format_number(level);
    out << '\n';
  }
  if (!config.sim.methods.empty()) {
    out << "methods =";
    for (SimMethodId m : config.sim.methods) out << ' ' << method_name(m);
    out << '\n';
  }
  out << "boot_B = " << config.sim.bootstrap_B << '\n';
  if (config.sim.offline_b)
    out << "offline_b = " << format_number(*config.sim.offline_b) << '\n';
  out << "trim = " << config.sim.trim << '\n';
  out << "oracle_draws = " << config.sim.oracle_draws << '\n';
  if (!config.design_file.empty())
    out << "design_file = " << config.design_file << '\n';
  if (!config.out_path.empty()) out << "out = " << config.out_path << '\n';
  out << "format = " << config.format << '\n';
  for (const auto& cell : config.sim.cells) {
    out << "\n[cell]\n";
    out << "population = " << config.sim.populations[cell.population_index].id
        << '\n';
    out << "n = " << cell.n << '\n';
  }
  return out.str();
}

}  // namespace ael
