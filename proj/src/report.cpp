#include "fpqkd/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fpqkd {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {
std::string hash_line(std::uint64_t h) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "# config_hash=%016" PRIx64 "\n", h);
  return buf;
}
}  // namespace

std::string tallies_csv(std::uint64_t cfg_hash, std::span<const RegionTally> tallies) {
  std::ostringstream out;
  out << hash_line(cfg_hash);
  out << "region,basis,n_classified,n_sent,n_detected,n_error,q,qe,sigma_q,sigma_qe\n";
  for (const auto& t : tallies) {
    out << t.label << ',' << to_string(t.basis) << ',' << t.n_classified << ','
        << t.n_sent << ',' << t.n_detected << ',' << t.n_error << ','
        << format_g17(t.q) << ',' << format_g17(t.qe) << ','
        << format_g17(t.sigma_q) << ',' << format_g17(t.sigma_qe) << '\n';
  }
  return out.str();
}

std::vector<RegionTally> parse_tallies_csv(const std::string& text) {
  std::vector<RegionTally> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line.rfind("region,", 0) == 0) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 10)
      throw DataError("tallies csv line " + std::to_string(lineno) + ": expected 10 fields");
    RegionTally t;
    try {
      t.label = fields[0];
      t.basis = (fields[1] == "Z") ? Basis::z : Basis::x;
      t.n_classified = std::stoull(fields[2]);
      t.n_sent = std::stoull(fields[3]);
      t.n_detected = std::stoull(fields[4]);
      t.n_error = std::stoull(fields[5]);
      t.q = std::stod(fields[6]);
      t.qe = std::stod(fields[7]);
      t.sigma_q = std::stod(fields[8]);
      t.sigma_qe = std::stod(fields[9]);
    } catch (const std::exception&) {
      throw DataError("tallies csv line " + std::to_string(lineno) + ": parse failure");
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::string bounds_csv(std::uint64_t cfg_hash, const DecoyBounds& b) {
  std::ostringstream out;
  out << hash_line(cfg_hash);
  out << "y1_low,y1_low_x,e1y1_high,e1_high,e1_capped,lp_status,complementary_residual\n";
  out << format_g17(b.y1_low) << ',' << format_g17(b.y1_low_x) << ','
      << format_g17(b.e1y1_high) << ',' << format_g17(b.e1_high) << ','
      << (b.e1_capped ? 1 : 0) << ',' << b.lp_status << ','
      << format_g17(b.complementary_residual) << '\n';
  return out.str();
}

std::string keyrate_csv(std::uint64_t cfg_hash, double loss_db, const KeyRateReport& r) {
  std::ostringstream out;
  out << hash_line(cfg_hash);
  out << "loss_db,p_z,p1_avg,y1_low,e1_high,q_z,qe_z,f_e,"
         "single_photon_term,error_correction_term,rate,rate_clamped,zero_gain\n";
  out << format_g17(loss_db) << ',' << format_g17(r.inputs.p_z) << ','
      << format_g17(r.inputs.p1_avg) << ',' << format_g17(r.inputs.y1_low) << ','
      << format_g17(r.inputs.e1_high) << ',' << format_g17(r.inputs.q_z) << ','
      << format_g17(r.inputs.qe_z) << ',' << format_g17(r.inputs.f_e) << ','
      << format_g17(r.single_photon_term) << ',' << format_g17(r.error_correction_term)
      << ',' << format_g17(r.r) << ',' << format_g17(r.r_clamped) << ','
      << (r.zero_gain ? 1 : 0) << '\n';
  return out.str();
}

std::string sweep_csv(std::uint64_t cfg_hash, std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << hash_line(cfg_hash);
  out << "loss_db,distance_km,rate,y1_low,e1_high\n";
  for (const auto& r : rows) {
    out << format_g17(r.loss_db) << ',' << format_g17(r.distance_km) << ','
        << format_g17(r.rate) << ',' << format_g17(r.y1_low) << ','
        << format_g17(r.e1_high) << '\n';
  }
  return out.str();
}

std::string manifest_text(const RunManifest& m, const RunConfig& cfg) {
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, m.cfg_hash);
  out << "version: " << m.version << "\n";
  out << "config_hash: " << buf << "\n";
  out << "seed: " << m.seed << "\n";
  out << "n_samples: " << m.n_samples << "\n";
  out << "shards: " << m.shards << "\n";
  out << "artifacts:\n";
  for (const auto& a : m.artifacts) out << "  - " << a << "\n";
  out << "config: |\n";
  std::istringstream cfg_in(dump_config(cfg));
  std::string line;
  while (std::getline(cfg_in, line)) out << "  " << line << "\n";
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << content;
  if (!out) throw DataError("write failure: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fpqkd
