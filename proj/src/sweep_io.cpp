#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "gapcert/sweep.hpp"

namespace gapcert {

namespace {

constexpr const char* kStateFormat = "gapcert-sweep-state-1";

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

long to_long(const std::string& s) {
  std::size_t pos = 0;
  const long v = std::stol(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad integer '" + s + "'");
  return v;
}

CertifiedCell parse_cell(const std::string& line) {
  const auto f = split(line, ',');
  if (f.size() != 14) throw std::invalid_argument("sweep CSV row needs 14 fields: " + line);
  CertifiedCell c;
  c.j = to_long(f[0]);
  c.i = to_long(f[1]);
  c.x = to_double(f[2]);
  c.y = to_double(f[3]);
  c.lambda1 = to_double(f[4]);
  c.lambda2 = to_double(f[5]);
  c.xi = to_double(f[6]);
  c.a_sum = to_double(f[7]);
  c.t_prime = to_double(f[8]);
  c.n = static_cast<int>(to_long(f[9]));
  c.d = static_cast<int>(to_long(f[10]));
  c.t_radius = to_double(f[11]);
  c.err = to_double(f[12]);
  c.accuracy_met = f[13] == "true";
  return c;
}

}  // namespace

std::string csv_header() {
  return "j,i,x,y,lambda1,lambda2,xi,A_sum,t_prime,n,d,t_radius,err,accuracy_met\n";
}

std::string csv_row(const CertifiedCell& c) {
  return fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{:.17g},{:.17g},{}\n", c.j,
                     c.i, c.x, c.y, c.lambda1, c.lambda2, c.xi, c.a_sum, c.t_prime, c.n, c.d, c.t_radius, c.err,
                     c.accuracy_met ? "true" : "false");
}

std::vector<CertifiedCell> read_cells_csv(std::istream& in) {
  std::vector<CertifiedCell> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.rfind("j,", 0) == 0) continue;
    out.push_back(parse_cell(line));
  }
  return out;
}

std::string config_fingerprint(const SweepConfig& cfg) {
  const auto& g = cfg.gap;
  return fmt::format("{};{:.17g},{:.17g},{:.17g},{:.17g};box={:.17g};floor={:.17g};resolves={};levels={},{},{},{},{};"
                     "safety={:.17g};rate={:.17g},{:.17g};eig={},{},{},{:.17g},{};budget={}",
                     rule_name(cfg.rule), cfg.window.x0, cfg.window.x1, cfg.window.y0, cfg.window.y1, cfg.root_box,
                     cfg.accuracy.floor, cfg.accuracy.max_resolves, g.start_level, g.max_level, g.thin_max_level,
                     g.table_levels, g.max_depth, g.safety_factor, g.min_rate, g.max_rate, g.eigen.extra_vectors,
                     g.eigen.max_basis, g.eigen.max_iterations, g.eigen.tolerance,
                     g.eigen.factorization == Factorization::sparse ? "sparse" : "envelope", g.memory_budget_bytes);
}

std::string serialize_state(const SweepState& s, const SweepConfig& cfg, std::size_t csv_bytes) {
  std::string out;
  out += fmt::format("format={}\n", kStateFormat);
  out += fmt::format("config={}\n", config_fingerprint(cfg));
  out += fmt::format("status={}\n", status_name(s.status));
  out += fmt::format("failure={}\n", s.failure);
  out += fmt::format("j={}\ni={}\n", s.j, s.i);
  out += fmt::format("x={:.17g}\ny={:.17g}\n", s.x, s.y);
  out += fmt::format("row_seed_radius={:.17g}\n", s.row_seed_radius);
  out += fmt::format("completed_cells={}\ncompleted_rows={}\n", s.completed_cells, s.completed_rows);
  out += fmt::format("csv_bytes={}\n", csv_bytes);
  out += fmt::format("seeds_complete={}\nseed_count={}\n", s.seeds_complete ? 1 : 0, s.seeds.size());
  for (std::size_t k = 0; k < s.seeds.size(); ++k) {
    std::string row = csv_row(s.seeds[k]);
    row.pop_back();
    out += fmt::format("seed.{}={}\n", k, row);
  }
  return out;
}

StoredState parse_state(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("resume file: malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto get = [&](const std::string& k) -> const std::string& {
    const auto it = kv.find(k);
    if (it == kv.end()) throw std::invalid_argument("resume file: missing key '" + k + "'");
    return it->second;
  };
  if (get("format") != kStateFormat) throw std::invalid_argument("resume file: unknown format");

  StoredState st;
  SweepState& s = st.state;
  const std::string& status = get("status");
  if (status == "running") {
    s.status = SweepStatus::running;
  } else if (status == "complete") {
    s.status = SweepStatus::complete;
  } else if (status == "failed") {
    s.status = SweepStatus::failed;
  } else {
    throw std::invalid_argument("resume file: bad status '" + status + "'");
  }
  s.failure = get("failure");
  s.j = to_long(get("j"));
  s.i = to_long(get("i"));
  s.x = to_double(get("x"));
  s.y = to_double(get("y"));
  s.row_seed_radius = to_double(get("row_seed_radius"));
  s.completed_cells = static_cast<std::size_t>(to_long(get("completed_cells")));
  s.completed_rows = static_cast<std::size_t>(to_long(get("completed_rows")));
  s.seeds_complete = get("seeds_complete") == "1";
  const long n = to_long(get("seed_count"));
  for (long k = 0; k < n; ++k) s.seeds.push_back(parse_cell(get(fmt::format("seed.{}", k))));
  st.csv_bytes = static_cast<std::size_t>(to_long(get("csv_bytes")));
  st.config_fingerprint = get("config");
  return st;
}

SweepFiles::SweepFiles(std::string csv_path, std::string state_path, const SweepConfig& cfg, bool resume)
    : csv_path_(std::move(csv_path)), state_path_(std::move(state_path)), cfg_(cfg) {
  namespace fs = std::filesystem;
  if (resume && fs::exists(state_path_)) {
    std::ifstream in(state_path_);
    stored_ = parse_state(in);
    if (stored_.config_fingerprint != config_fingerprint(cfg_)) {
      throw std::invalid_argument("resume file was written with a different configuration: " + state_path_);
    }
    if (!fs::exists(csv_path_) || fs::file_size(csv_path_) < stored_.csv_bytes) {
      throw std::runtime_error("sweep CSV is shorter than the resume file records: " + csv_path_);
    }
    // Drop anything written after the last snapshot.
    fs::resize_file(csv_path_, stored_.csv_bytes);
    csv_bytes_ = stored_.csv_bytes;
    resumed_ = true;
    return;
  }
  std::ofstream out(csv_path_, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + csv_path_);
  const std::string h = csv_header();
  out << h;
  csv_bytes_ = h.size();
  // A fresh run must not be confused with an older snapshot.
  std::error_code ec;
  fs::remove(state_path_, ec);
}

void SweepFiles::commit(std::span<const CertifiedCell> row, const SweepState& after) {
  std::string text;
  for (const auto& c : row) text += csv_row(c);
  {
    std::ofstream out(csv_path_, std::ios::binary | std::ios::app);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + csv_path_);
  }
  csv_bytes_ += text.size();
  const std::string tmp = state_path_ + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << serialize_state(after, cfg_, csv_bytes_);
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, state_path_);
}

}  // namespace gapcert
