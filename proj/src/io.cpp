#include "etatest/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "etatest/dataset.hpp"

namespace etatest {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& token, std::size_t row, const fs::path& path) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  while (first < last && *first == ' ') ++first;
  if (first < last && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw Error(path.string() + ": row " + std::to_string(row) + ": malformed number '" + token +
                "'");
  }
  if (!std::isfinite(v)) {
    throw Error(path.string() + ": row " + std::to_string(row) + ": non-finite value '" + token +
                "'");
  }
  return v;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return in;
}

json read_json(const fs::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::string column_names(char prefix, int count) {
  std::string out;
  for (int k = 0; k < count; ++k) {
    if (!out.empty()) out += ',';
    out += prefix + std::to_string(k);
  }
  return out;
}

int count_prefix(const std::vector<std::string>& header, char prefix) {
  int c = 0;
  for (const auto& h : header)
    if (!h.empty() && h[0] == prefix) ++c;
  return c;
}

}  // namespace

fs::path manifest_path(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".json");
  return p;
}

void save(const Dataset& data, const fs::path& csv) {
  {
    auto out = open_out(csv);
    out << column_names('x', data.n()) << ',' << column_names('u', data.m()) << ','
        << column_names('y', data.n()) << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
      std::string line;
      auto append = [&](const Dataset::ConstView& v) {
        for (Eigen::Index k = 0; k < v.size(); ++k) {
          if (!line.empty()) line += ',';
          line += format_real(v[k]);
        }
      };
      append(data.x(i));
      append(data.u(i));
      append(data.y(i));
      out << line << '\n';
    }
  }
  json bounds = json::array();
  for (const auto& b : data.meta().bounds) bounds.push_back({b.lo, b.hi});
  const json manifest = {{"n", data.n()},
                         {"m", data.m()},
                         {"time_kind", std::string(to_string(data.time_kind()))},
                         {"system", data.meta().system},
                         {"policy", data.meta().policy},
                         {"seed", data.meta().seed},
                         {"bounds", bounds},
                         {"noise_amp", data.meta().noise_amp},
                         {"N", data.size()}};
  auto out = open_out(manifest_path(csv));
  out << manifest.dump(2) << '\n';
}

Dataset load(const fs::path& csv) {
  auto in = open_in(csv);
  std::string line;
  if (!std::getline(in, line)) throw Error(csv.string() + ": missing header row");
  const auto header = split(line);
  int n = count_prefix(header, 'x');
  int m = count_prefix(header, 'u');
  const int ny = count_prefix(header, 'y');

  TimeKind kind = TimeKind::Continuous;
  DatasetMeta meta;
  std::optional<std::size_t> expected_rows;
  if (const auto mpath = manifest_path(csv); fs::exists(mpath)) {
    const json j = read_json(mpath);
    try {
      const int mn = j.at("n").get<int>();
      const int mm = j.at("m").get<int>();
      if (mn != n || mm != m || ny != n) {
        throw Error(csv.string() + ": header has " + std::to_string(n) + " state, " +
                    std::to_string(m) + " action and " + std::to_string(ny) +
                    " derivative columns but the manifest declares n=" + std::to_string(mn) +
                    ", m=" + std::to_string(mm));
      }
      kind = parse_time_kind(j.at("time_kind").get<std::string>());
      meta.system = j.value("system", "");
      meta.policy = j.value("policy", "");
      meta.seed = j.value("seed", std::uint64_t{0});
      meta.noise_amp = j.value("noise_amp", 0.0);
      for (const auto& b : j.value("bounds", json::array())) {
        meta.bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
      }
      if (j.contains("N")) expected_rows = j.at("N").get<std::size_t>();
    } catch (const json::exception& e) {
      throw Error(mpath.string() + ": " + e.what());
    }
  }
  if (n <= 0 || m <= 0 || ny != n) throw Error(csv.string() + ": malformed header '" + line + "'");
  const std::string expected_header =
      column_names('x', n) + ',' + column_names('u', m) + ',' + column_names('y', n);
  if (line != expected_header && line != expected_header + "\r") {
    throw Error(csv.string() + ": header must be '" + expected_header + "'");
  }

  Dataset data(n, m, kind, std::move(meta));
  Vec x(n), u(m), y(n);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const auto cells = split(line);
    if (static_cast<int>(cells.size()) != 2 * n + m) {
      throw Error(csv.string() + ": row " + std::to_string(row) + " has " +
                  std::to_string(cells.size()) + " columns, expected " +
                  std::to_string(2 * n + m));
    }
    for (int k = 0; k < n; ++k) x[k] = parse_real(cells[k], row, csv);
    for (int k = 0; k < m; ++k) u[k] = parse_real(cells[n + k], row, csv);
    for (int k = 0; k < n; ++k) y[k] = parse_real(cells[n + m + k], row, csv);
    data.add(x, u, y);
  }
  if (expected_rows && *expected_rows != data.size()) {
    throw Error(csv.string() + ": manifest declares N=" + std::to_string(*expected_rows) +
                " but the file has " + std::to_string(data.size()) + " rows");
  }
  check_consistency(data);
  return data;
}

// ---------------------------------------------------------------------------

void save_lipschitz(const LipschitzField& field, const fs::path& csv) {
  {
    auto out = open_out(csv);
    out << "i,L_x,L_u,unconstrained_flag\n";
    for (std::size_t i = 0; i < field.size(); ++i) {
      out << i << ',' << format_real(field[i].lx) << ',' << format_real(field[i].lu) << ','
          << (field[i].unconstrained ? 1 : 0) << '\n';
    }
  }
  auto out = open_out(manifest_path(csv));
  out << json{{"delta", field.delta}, {"lambda", field.lambda}, {"N", field.size()}}.dump(2)
      << '\n';
}

LipschitzField load_lipschitz(const fs::path& csv) {
  const json manifest = read_json(manifest_path(csv));
  LipschitzField field;
  field.delta = manifest.at("delta").get<double>();
  field.lambda = manifest.at("lambda").get<double>();
  auto in = open_in(csv);
  std::string line;
  std::getline(in, line);
  if (line != "i,L_x,L_u,unconstrained_flag") throw Error(csv.string() + ": bad header");
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    const auto cells = split(line);
    if (cells.size() != 4 || std::stoul(cells[0]) != row - 1) {
      throw Error(csv.string() + ": malformed row " + std::to_string(row));
    }
    field.entries.push_back(
        {parse_real(cells[1], row, csv), parse_real(cells[2], row, csv), cells[3] == "1"});
  }
  return field;
}

void save_reports(const Verdict& verdict, int n, const fs::path& csv) {
  const bool with_truth = std::any_of(verdict.reports.begin(), verdict.reports.end(),
                                      [](const PointReport& r) { return r.true_vdot.has_value(); });
  auto out = open_out(csv);
  out << "i," << column_names('x', n) << ",neighbors,eta_max,eta_min"
      << (with_truth ? ",true_vdot" : "") << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  for (const auto& r : verdict.reports) {
    out << r.index;
    for (Eigen::Index k = 0; k < r.x.size(); ++k) out << ',' << format_real(r.x[k]);
    out << ',' << r.neighbors << ',' << opt(r.eta_max) << ',' << opt(r.eta_min);
    if (with_truth) out << ',' << opt(r.true_vdot);
    out << '\n';
  }
}

std::string summary_json(const RunSummary& s) {
  const json j = {{"verdict", std::string(to_string(s.verdict))},
                  {"counts",
                   {{"points", s.counts.points},
                    {"exempt", s.counts.exempt},
                    {"unconstrained", s.counts.unconstrained},
                    {"infeasible", s.counts.infeasible},
                    {"restored", s.counts.restored},
                    {"eta_max_negative", s.counts.eta_max_negative},
                    {"eta_min_positive", s.counts.eta_min_positive}}},
                  {"delta", s.delta},
                  {"lambda", s.lambda},
                  {"epsilon_critical", s.epsilon_critical},
                  {"runtime_ms", s.runtime_ms}};
  return j.dump(2);
}

void save_summary(const RunSummary& summary, const fs::path& path) {
  auto out = open_out(path);
  out << summary_json(summary) << '\n';
}

}  // namespace etatest
