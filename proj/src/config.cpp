#include "fpqkd/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

namespace fpqkd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw ConfigError("config line " + std::to_string(line) + ": bad number '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const unsigned long long d = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw ConfigError("config line " + std::to_string(line) + ": bad integer '" + v + "'");
  }
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config line " + std::to_string(line) + ": bad flag '" + v + "'");
}

std::vector<double> parse_list(const std::string& v, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), line));
  if (out.empty())
    throw ConfigError("config line " + std::to_string(line) + ": empty list");
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ReshapeSpec RunConfig::reshape() const {
  if (reshape_c > 0.0) return {reshape_c, source.mu_max_per_pol};
  return auto_reshape(source.mu_max_per_pol);
}

RunConfig load_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("config line " + std::to_string(line) + ": unterminated section");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "source" && section != "reshape" && section != "regions" &&
          section != "channel" && section != "decoy" && section != "keyrate" &&
          section != "run")
        throw ConfigError("config line " + std::to_string(line) + ": unknown section [" +
                          section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    const std::string path = section + "." + key;

    if (path == "source.mu_max") cfg.source.mu_max_per_pol = parse_double(val, line);
    else if (path == "source.train_mode") cfg.source.train_mode = parse_bool(val, line);
    else if (path == "source.seed") cfg.source.rng_seed = parse_u64(val, line);
    else if (path == "reshape.c") cfg.reshape_c = (val == "auto") ? -1.0 : parse_double(val, line);
    else if (path == "regions.delta_z") cfg.regions.delta_z = parse_double(val, line);
    else if (path == "regions.delta_x") cfg.regions.delta_x = parse_double(val, line);
    else if (path == "regions.delta_phi") cfg.regions.delta_phi = parse_double(val, line);
    else if (path == "regions.r_max") cfg.regions.r_max = parse_double(val, line);
    else if (path == "regions.t") cfg.regions.t = parse_list(val, line);
    else if (path == "channel.loss_db") cfg.channel.loss_db = parse_double(val, line);
    else if (path == "channel.detector_efficiency")
      cfg.channel.detector_efficiency = parse_double(val, line);
    else if (path == "channel.dark_prob") cfg.channel.dark_prob = parse_double(val, line);
    else if (path == "channel.misalignment")
      cfg.channel.misalignment_e_d = parse_double(val, line);
    else if (path == "channel.basis_split") cfg.channel.basis_split = parse_double(val, line);
    else if (path == "decoy.n_cut") cfg.decoy.n_cut = static_cast<int>(parse_u64(val, line));
    else if (path == "decoy.k_sigma") cfg.decoy.k_sigma = parse_double(val, line);
    else if (path == "keyrate.f_e") cfg.keyrate.f_e = parse_double(val, line);
    else if (path == "run.n_samples") cfg.run.n_samples = parse_u64(val, line);
    else if (path == "run.shards") cfg.run.shards = static_cast<int>(parse_u64(val, line));
    else if (path == "run.out_dir") cfg.run.out_dir = val;
    else
      throw ConfigError("config line " + std::to_string(line) + ": unknown key '" + path + "'");
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config_text(ss.str());
}

std::string dump_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[source]\n";
  out << "mu_max = " << fmt(cfg.source.mu_max_per_pol) << "\n";
  out << "train_mode = " << (cfg.source.train_mode ? "true" : "false") << "\n";
  out << "seed = " << cfg.source.rng_seed << "\n";
  out << "\n[reshape]\n";
  if (cfg.reshape_c > 0.0) out << "c = " << fmt(cfg.reshape_c) << "\n";
  else out << "c = auto\n";
  out << "\n[regions]\n";
  out << "delta_z = " << fmt(cfg.regions.delta_z) << "\n";
  out << "delta_x = " << fmt(cfg.regions.delta_x) << "\n";
  out << "delta_phi = " << fmt(cfg.regions.delta_phi) << "\n";
  out << "r_max = " << fmt(cfg.regions.r_max) << "\n";
  out << "t = ";
  for (std::size_t i = 0; i < cfg.regions.t.size(); ++i)
    out << (i ? "," : "") << fmt(cfg.regions.t[i]);
  out << "\n";
  out << "\n[channel]\n";
  out << "loss_db = " << fmt(cfg.channel.loss_db) << "\n";
  out << "detector_efficiency = " << fmt(cfg.channel.detector_efficiency) << "\n";
  out << "dark_prob = " << fmt(cfg.channel.dark_prob) << "\n";
  out << "misalignment = " << fmt(cfg.channel.misalignment_e_d) << "\n";
  out << "basis_split = " << fmt(cfg.channel.basis_split) << "\n";
  out << "\n[decoy]\n";
  out << "n_cut = " << cfg.decoy.n_cut << "\n";
  out << "k_sigma = " << fmt(cfg.decoy.k_sigma) << "\n";
  out << "\n[keyrate]\n";
  out << "f_e = " << fmt(cfg.keyrate.f_e) << "\n";
  out << "\n[run]\n";
  out << "n_samples = " << cfg.run.n_samples << "\n";
  out << "shards = " << cfg.run.shards << "\n";
  out << "out_dir = " << cfg.run.out_dir << "\n";
  return out.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string dump = dump_config(cfg);
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

void validate(const RunConfig& cfg) {
  const auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("config field " + field + ": " + why);
  };
  if (!(cfg.source.mu_max_per_pol > 0.0)) fail("source.mu_max", "must be > 0");
  if (cfg.reshape_c > 0.0) {
    // A supplied C must stay an envelope: C * e^mu <= f(mu) everywhere.
    const double c_max = compute_C(cfg.source.mu_max_per_pol);
    if (cfg.reshape_c > c_max * (1.0 + 1e-9))
      fail("reshape.c", "exceeds the largest valid envelope scale " + std::to_string(c_max));
  }
  if (!(cfg.regions.delta_z > 0.0)) fail("regions.delta_z", "must be > 0");
  if (!(cfg.regions.delta_x > 0.0)) fail("regions.delta_x", "must be > 0");
  if (!(cfg.regions.delta_phi > 0.0)) fail("regions.delta_phi", "must be > 0");
  if (!(cfg.regions.r_max > 0.0)) fail("regions.r_max", "must be > 0");
  if (cfg.regions.delta_z >= std::numbers::pi / 4.0 - cfg.regions.delta_x / 2.0)
    fail("regions.delta_z", "Z and X wedges overlap");
  for (double t : cfg.regions.t)
    if (!(t > 0.0) || t > 1.0) fail("regions.t", "factors must be in (0, 1]");
  if (cfg.channel.loss_db < 0.0) fail("channel.loss_db", "must be >= 0");
  const auto prob = [&](double v, const char* name) {
    if (!(v >= 0.0) || !(v <= 1.0)) fail(name, "must be in [0, 1]");
  };
  prob(cfg.channel.detector_efficiency, "channel.detector_efficiency");
  prob(cfg.channel.dark_prob, "channel.dark_prob");
  prob(cfg.channel.misalignment_e_d, "channel.misalignment");
  prob(cfg.channel.basis_split, "channel.basis_split");
  if (cfg.decoy.n_cut < 2) fail("decoy.n_cut", "must be >= 2");
  if (cfg.decoy.k_sigma < 0.0) fail("decoy.k_sigma", "must be >= 0");
  if (cfg.keyrate.f_e < 1.0) fail("keyrate.f_e", "must be >= 1");
  if (cfg.run.n_samples < 1) fail("run.n_samples", "must be >= 1");
  if (cfg.run.shards < 1) fail("run.shards", "must be >= 1");
}

}  // namespace fpqkd
