#include "bvpdisc_app/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bvpdisc_app/format.hpp"

namespace bvpdisc::app {

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

void write_dataset(const TrialSet& trials, const std::filesystem::path& csv_path,
                   std::uint64_t seed) {
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  const std::size_t m = trials.size();
  const Grid& grid = trials.grid();

  std::string text = "x";
  for (std::size_t j = 1; j <= m; ++j) text += ",f_" + std::to_string(j);
  for (std::size_t j = 1; j <= m; ++j) text += ",u_" + std::to_string(j);
  text += '\n';
  for (std::size_t k = 0; k < grid.size(); ++k) {
    text += format_double(grid[k]);
    for (std::size_t j = 0; j < m; ++j) text += ',' + format_double(trials[j].f[k]);
    for (std::size_t j = 0; j < m; ++j) text += ',' + format_double(trials[j].u[k]);
    text += '\n';
  }
  write_text(csv_path, text);

  nlohmann::ordered_json meta;
  meta["model"] = trials.model();
  meta["grid"] = {{"a", grid.a()}, {"b", grid.b()}, {"n", grid.size()}};
  const auto& bc = trials.bc();
  meta["bc"] = {{"left", bc.left},
                {"right", bc.right},
                {"left_slope", bc.left_slope},
                {"right_slope", bc.right_slope}};
  meta["seed"] = seed;
  meta["trials"] = nlohmann::ordered_json::array();
  for (const auto& t : trials.trials()) {
    meta["trials"].push_back({{"amplitude", t.forcing.amplitude},
                              {"frequency", t.forcing.frequency},
                              {"offset", t.forcing.offset},
                              {"shooting_parameters", t.shooting_parameters}});
  }
  write_text(sidecar_path(csv_path), meta.dump(2) + '\n');
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  return out;
}

double parse_number(const std::string& s, std::size_t row) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw InvalidArgument("dataset row " + std::to_string(row) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

TrialSet read_dataset(const std::filesystem::path& csv_path) {
  std::ifstream csv(csv_path);
  if (!csv) throw InvalidArgument("cannot open dataset '" + csv_path.string() + "'");
  std::ifstream side(sidecar_path(csv_path));
  if (!side) {
    throw InvalidArgument("dataset sidecar '" + sidecar_path(csv_path).string() + "' is missing");
  }
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(side);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("dataset sidecar: " + std::string(e.what()));
  }

  const Grid grid(meta.at("grid").at("a").get<double>(), meta.at("grid").at("b").get<double>(),
                  meta.at("grid").at("n").get<std::size_t>());
  BoundaryConditions bc;
  bc.left = meta.at("bc").at("left").get<double>();
  bc.right = meta.at("bc").at("right").get<double>();
  bc.left_slope = meta.at("bc").value("left_slope", 0.0);
  bc.right_slope = meta.at("bc").value("right_slope", 0.0);
  const std::string model = meta.at("model").get<std::string>();
  const auto& specs = meta.at("trials");
  const std::size_t m = specs.size();

  std::string line;
  if (!std::getline(csv, line)) throw InvalidArgument("dataset is empty");
  const auto header = split(line);
  if (header.size() != 1 + 2 * m || header[0] != "x") {
    throw InvalidArgument("dataset header does not match the " + std::to_string(m) +
                          " trials listed in the sidecar");
  }

  std::vector<Trial> trials(m);
  for (std::size_t j = 0; j < m; ++j) {
    trials[j].model = model;
    trials[j].forcing = {specs[j].at("amplitude").get<double>(),
                         specs[j].at("frequency").get<double>(),
                         specs[j].at("offset").get<double>()};
    trials[j].shooting_parameters =
        specs[j].value("shooting_parameters", std::vector<double>{});
    trials[j].f.reserve(grid.size());
    trials[j].u.reserve(grid.size());
  }
  std::size_t row = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw InvalidArgument("dataset row " + std::to_string(row + 1) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
    }
    if (row >= grid.size()) throw InvalidArgument("dataset has more rows than grid points");
    const double x = parse_number(fields[0], row + 1);
    if (std::abs(x - grid[row]) > 1e-9 * std::max(1.0, std::abs(grid[row]))) {
      throw InvalidArgument("dataset x column disagrees with the sidecar grid at row " +
                            std::to_string(row + 1));
    }
    for (std::size_t j = 0; j < m; ++j) {
      trials[j].f.push_back(parse_number(fields[1 + j], row + 1));
      trials[j].u.push_back(parse_number(fields[1 + m + j], row + 1));
    }
    ++row;
  }
  if (row != grid.size()) {
    throw InvalidArgument("dataset has " + std::to_string(row) + " rows, expected " +
                          std::to_string(grid.size()));
  }
  return TrialSet(grid, model, bc, std::move(trials));
}

}  // namespace bvpdisc::app
