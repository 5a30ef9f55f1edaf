#pragma once

#include <cstdint>
#include <sstream>

#include <json.hpp>

#include "suites.hpp"

namespace lfcheck {

using Json = nlohmann::ordered_json;

inline Json config_json(const RunConfig& cfg) {
  Json j;
  j["command"] = cfg.command;
  j["family"] = family_name(cfg.family);
  j["params"] = {{"a", cfg.param(0)}, {"b", cfg.param(1)}, {"c", cfg.param(2)}, {"eta", cfg.param(3)}};
  if (cfg.command == "sweep")
    j["eta_range"] = {{"min", cfg.eta_min.value_or("")}, {"max", cfg.eta_max.value_or("")}, {"steps", cfg.eta_steps}};
  j["n"] = cfg.n;
  j["precision_bits"] = cfg.prec_bits;
  j["guard_bits"] = cfg.guard_bits;
  j["route"] = route_name(cfg.route);
  j["variants"] = cfg.variants;
  j["suite"] = cfg.suite;
  j["sabotage"] = cfg.sabotage;
  j["allow_hahn_eta_ge_one"] = cfg.allow_hahn_eta_ge_one;
  j["tool_version"] = tool_version;
  return j;
}

/// 64-bit FNV-1a of the serialized config, as hex.
inline std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : config_json(cfg).dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

inline Json report_json(const ResidualReport& r, const RunConfig& cfg, const SuiteResult& res) {
  const unsigned bits = cfg.prec_bits;
  Json j;
  j["identity"] = r.identity;
  j["variant"] = r.variant;
  j["family"] = r.family;
  j["params"] = {{"a", cfg.param(0)}, {"b", cfg.param(1)}, {"c", cfg.param(2)}, {"eta", cfg.param(3)}};
  j["gating"] = r.gating;
  j["max_residual"] = to_decimal(r.max_residual(), bits);
  j["tolerance"] = to_decimal(r.tolerance, bits);
  j["verdict"] = r.pass() ? "pass" : "fail";
  Json per_n = Json::array();
  for (std::size_t i = 0; i < r.n.size(); ++i)
    per_n.push_back({{"n", r.n[i]}, {"residual", to_decimal(r.residual[i], bits)}});
  j["per_n"] = per_n;
  j["runtime_ms"] = cfg.timing ? r.runtime_ms : 0.0;
  j["note"] = r.note;
  j["config_hash"] = config_hash(cfg);
  Json c = config_json(cfg);
  c["truncation"] = res.truncation;
  j["config"] = c;
  return j;
}

inline std::string reports_to_json(const SuiteResult& res, const RunConfig& cfg) {
  Json a = Json::array();
  for (const auto& r : res.reports) a.push_back(report_json(r, cfg, res));
  return a.dump(2) + "\n";
}

/// Long format: one line per (identity, n).
inline std::string reports_to_csv(const SuiteResult& res, const RunConfig& cfg) {
  std::ostringstream os;
  const std::string hash = config_hash(cfg);
  os << "identity,variant,family,gating,n,residual,max_residual,tolerance,verdict,config_hash\n";
  for (const auto& r : res.reports) {
    std::string head = "\"" + r.identity + "\",\"" + r.variant + "\"," + r.family + "," + (r.gating ? "1" : "0");
    std::string tail = to_decimal(r.max_residual(), cfg.prec_bits) + "," + to_decimal(r.tolerance, cfg.prec_bits) +
                       "," + (r.pass() ? "pass" : "fail") + "," + hash;
    if (r.n.empty()) os << head << ",,," << tail << "\n";
    for (std::size_t i = 0; i < r.n.size(); ++i)
      os << head << "," << r.n[i] << "," << to_decimal(r.residual[i], cfg.prec_bits) << "," << tail << "\n";
  }
  return os.str();
}

inline const char* provenance_name(const CoefficientTable& t) {
  return t.provenance == Provenance::MomentRoute ? "moments" : "lf";
}

inline std::string tables_to_csv(const std::vector<CoefficientTable>& tables, unsigned bits) {
  std::ostringstream os;
  os << "n,beta,gamma,H,p1,provenance\n";
  for (const auto& t : tables)
    for (std::size_t n = 0; n < t.size(); ++n)
      os << n << "," << to_decimal(t.beta[n], bits) << "," << to_decimal(t.gamma[n], bits) << ","
         << (n < t.H.size() ? to_decimal(t.H[n], bits) : "") << ","
         << (n < t.p1.size() ? to_decimal(t.p1[n], bits) : "") << "," << provenance_name(t) << "\n";
  return os.str();
}

inline std::string tables_to_json(const std::vector<CoefficientTable>& tables, const RunConfig& cfg,
                                  const std::map<std::string, std::size_t>& truncation,
                                  const std::optional<std::size_t>& breakdown_index) {
  Json j;
  Json c = config_json(cfg);
  c["truncation"] = truncation;
  j["config"] = c;
  j["config_hash"] = config_hash(cfg);
  if (breakdown_index) j["breakdown_index"] = *breakdown_index;
  Json arr = Json::array();
  for (const auto& t : tables) {
    Json tj;
    tj["provenance"] = provenance_name(t);
    tj["variant"] = t.variant;
    Json rows = Json::array();
    for (std::size_t n = 0; n < t.size(); ++n) {
      Json row;
      row["n"] = n;
      row["beta"] = to_decimal(t.beta[n], cfg.prec_bits);
      row["gamma"] = to_decimal(t.gamma[n], cfg.prec_bits);
      if (n < t.H.size()) row["H"] = to_decimal(t.H[n], cfg.prec_bits);
      if (n < t.p1.size()) row["p1"] = to_decimal(t.p1[n], cfg.prec_bits);
      rows.push_back(row);
    }
    tj["rows"] = rows;
    arr.push_back(tj);
  }
  j["tables"] = arr;
  return j.dump(2) + "\n";
}

/// H_n = rho_0 gamma_1 ... gamma_n and p1_n = -(beta_0 + ... + beta_{n-1})
/// for a table that only carries beta and gamma.
inline void fill_norms(CoefficientTable& t, const Scalar& rho0) {
  t.H.clear();
  t.p1.clear();
  Scalar H = rho0, p1(0);
  for (std::size_t n = 0; n < t.size(); ++n) {
    if (n > 0) {
      H *= t.gamma[n];
      p1 -= t.beta[n - 1];
    }
    t.H.push_back(H);
    t.p1.push_back(p1);
  }
}

}  // namespace lfcheck
