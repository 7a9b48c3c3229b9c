#include "tnops/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace tnops {

namespace detail {

json matrix_to_json(const RowMatrix& m, bool pairs) {
  bool real = !pairs;
  for (Eigen::Index i = 0; real && i < m.size(); ++i)
    if (m.data()[i].imag() != 0.0) real = false;
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (real)
        row.push_back(m(r, c).real());
      else
        row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    }
    rows.push_back(row);
  }
  return rows;
}

RowMatrix matrix_from_json(const json& j, std::size_t d) {
  if (j.is_string()) return named_operator(j.get<std::string>(), d);
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw ConfigError("operator must be a name or a list of rows");
  const std::size_t rows = j.size(), cols = j[0].size();
  RowMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ConfigError("operator rows differ in length");
    for (std::size_t c = 0; c < cols; ++c) {
      const json& e = j[r][c];
      if (e.is_number())
        m(r, c) = cplx(e.get<double>(), 0.0);
      else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
        m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
      else
        throw ConfigError("operator entries must be numbers or [re, im]");
    }
  }
  return m;
}

json spec_to_json(const HamiltonianSpec& s) {
  json j;
  j["kind"] = hamiltonian_kind_name(s.kind);
  j["n_sites"] = s.n_sites;
  j["d"] = s.d;
  j["range"] = s.range;
  j["beta"] = s.beta;
  j["b_coeffs"] = s.b_coeffs;
  j["alpha_coeffs"] = s.alpha_coeffs;
  j["powers"] = s.powers;
  j["couplings"] = s.couplings;
  j["positions"] = s.positions;
  json ops = json::array();
  for (const RowMatrix& o : s.ops) ops.push_back(matrix_to_json(o));
  j["ops"] = ops;
  j["local"] = s.local ? matrix_to_json(*s.local) : json(nullptr);
  j["model"] = {{"name", s.model.name},   {"B", s.model.B},         {"theta", s.model.theta},
                {"delta", s.model.delta}, {"omega", s.model.omega}, {"beta0", s.model.beta0},
                {"sigma", s.model.sigma}, {"seed", s.model.seed}};
  return j;
}

HamiltonianSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("hamiltonian spec must be an object");
  HamiltonianSpec s;
  s.kind = hamiltonian_kind_from_name(get_or<std::string>(j, "kind", "model"));
  s.n_sites = get_or<std::size_t>(j, "n_sites", 0);
  if (s.n_sites == 0) throw ConfigError("hamiltonian spec needs n_sites >= 1");
  s.d = get_or<std::size_t>(j, "d", 2);
  s.range = get_or<std::size_t>(j, "range", 1);
  s.beta = get_or<double>(j, "beta", 0.5);
  s.b_coeffs = get_or<std::vector<double>>(j, "b_coeffs", {});
  s.alpha_coeffs = get_or<std::vector<double>>(j, "alpha_coeffs", {});
  s.powers = get_or<std::vector<unsigned>>(j, "powers", {});
  s.couplings = get_or<std::vector<double>>(j, "couplings", {});
  s.positions = get_or<std::vector<double>>(j, "positions", {});
  if (j.contains("ops")) {
    if (!j["ops"].is_array()) throw ConfigError("ops must be a list");
    for (const json& o : j["ops"]) s.ops.push_back(matrix_from_json(o, s.d));
  }
  if (j.contains("local") && !j["local"].is_null()) s.local = matrix_from_json(j["local"], s.d);
  if (j.contains("model")) {
    const json& m = j["model"];
    s.model.name = get_or<std::string>(m, "name", "");
    s.model.B = get_or<double>(m, "B", 1.0);
    s.model.theta = get_or<double>(m, "theta", 0.35);
    s.model.delta = get_or<double>(m, "delta", 0.1);
    s.model.omega = get_or<double>(m, "omega", 1.0);
    s.model.beta0 = get_or<double>(m, "beta0", 1.0);
    s.model.sigma = get_or<double>(m, "sigma", 0.0);
    s.model.seed = get_or<std::uint64_t>(m, "seed", 0);
  }
  if (s.kind == HamiltonianKind::Model && s.model.name.empty()) throw ConfigError("model spec needs model.name");
  return s;
}

namespace {

json rule_list(const std::vector<Rule>& rs) {
  json a = json::array();
  for (const Rule& r : rs)
    a.push_back({{"left", r.left},
                 {"right", r.right},
                 {"weight_re", r.weight.real()},
                 {"weight_im", r.weight.imag()},
                 {"op", matrix_to_json(r.op, true)}});
  return a;
}

std::vector<Rule> rule_list_from(const json& a, std::size_t d) {
  if (!a.is_array()) throw ConfigError("rules must be a list");
  std::vector<Rule> rs;
  for (const json& e : a) {
    Rule r;
    r.left = get_or<std::string>(e, "left", "");
    r.right = get_or<std::string>(e, "right", "");
    if (r.left.empty() || r.right.empty()) throw ConfigError("rule needs left and right labels");
    if (!e.contains("op")) throw ConfigError("rule needs an op");
    r.op = matrix_from_json(e["op"], d);
    r.weight = cplx(get_or<double>(e, "weight_re", 1.0), get_or<double>(e, "weight_im", 0.0));
    rs.push_back(std::move(r));
  }
  return rs;
}

}  // namespace

json rules_to_json(const RuleTable& t) {
  json j;
  j["d"] = t.rules.empty() ? 2 : t.rules.front().op.rows();
  j["alphabet"] = t.alphabet;
  j["left_boundary"] = t.left_boundary;
  j["right_boundary"] = t.right_boundary;
  j["rules"] = rule_list(t.rules);
  json ov = json::object();
  for (const auto& [site, rs] : t.overrides) ov[std::to_string(site)] = rule_list(rs);
  j["overrides"] = ov;
  json ba = json::object();
  for (const auto& [b, a] : t.bond_alphabets) ba[std::to_string(b)] = a;
  j["bond_alphabets"] = ba;
  return j;
}

RuleTable rules_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("rule table must be an object");
  const std::size_t d = get_or<std::size_t>(j, "d", 2);
  RuleTable t;
  t.alphabet = get_or<std::vector<std::string>>(j, "alphabet", {});
  t.left_boundary = get_or<std::string>(j, "left_boundary", "");
  t.right_boundary = get_or<std::string>(j, "right_boundary", "");
  if (j.contains("rules")) t.rules = rule_list_from(j["rules"], d);
  auto key = [](const std::string& k) {
    try {
      return static_cast<std::size_t>(std::stoul(k));
    } catch (...) {
      throw ConfigError("non-numeric key: " + k);
    }
  };
  if (j.contains("overrides"))
    for (const auto& [k, v] : j["overrides"].items()) t.overrides[key(k)] = rule_list_from(v, d);
  if (j.contains("bond_alphabets"))
    for (const auto& [k, v] : j["bond_alphabets"].items()) t.bond_alphabets[key(k)] = v.get<std::vector<std::string>>();
  return t;
}

json rank_to_json(const RankReport& r) {
  json j;
  j["tolerance"] = r.tol;
  j["optimal"] = r.optimal;
  j["optimal_interior"] = r.optimal_interior;
  j["dense"] = r.dense;
  json cuts = json::array();
  for (const CutRank& c : r.cuts)
    cuts.push_back({{"cut", c.cut}, {"rank", c.rank}, {"bond", c.bond}, {"borderline", c.borderline}});
  j["per_cut"] = cuts;
  return j;
}

}  // namespace detail

using detail::json;

// ---------------------------------------------------------------- containers

namespace {

const char kMagic[] = "TNOPS1\n";

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw IoError("truncated container");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_double(std::ostream& os, double x) {
  std::uint64_t u;
  std::memcpy(&u, &x, 8);
  put_u64(os, u);
}

double get_double(std::istream& is) {
  const std::uint64_t u = get_u64(is);
  double x;
  std::memcpy(&x, &u, 8);
  return x;
}

void write_container(const std::string& path, const std::string& kind, const std::vector<DenseTensor>& sites,
                     std::uint64_t seed) {
  json h;
  h["format"] = "tnops-container";
  h["version"] = 1;
  h["kind"] = kind;
  h["dtype"] = "complex128";
  h["endianness"] = "little";
  h["library"] = "tnops 0.1.0";
  h["seed"] = seed;
  json shapes = json::array();
  for (const DenseTensor& t : sites) shapes.push_back(t.shape());
  h["sites"] = shapes;
  const std::string header = h.dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write(kMagic, sizeof(kMagic) - 1);
  put_u64(os, header.size());
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const DenseTensor& t : sites)
    for (const cplx& v : t.values()) {
      put_double(os, v.real());
      put_double(os, v.imag());
    }
  if (!os) throw IoError("write failed: " + path);
}

std::vector<DenseTensor> read_container(const std::string& path, const std::string& kind, json* header_out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[sizeof(kMagic) - 1];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw IoError("not a tnops container: " + path);
  const std::uint64_t len = get_u64(is);
  if (len > (1u << 26)) throw IoError("container header too large");
  std::string text(len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(len))) throw IoError("truncated container header");
  json h;
  try {
    h = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("bad container header: ") + e.what());
  }
  if (header_out) *header_out = h;
  if (h.value("dtype", "") != "complex128" || h.value("endianness", "") != "little")
    throw IoError("unsupported container payload");
  if (!kind.empty() && h.value("kind", "") != kind)
    throw IoError("container holds '" + h.value("kind", "") + "', expected '" + kind + "'");
  std::vector<DenseTensor> sites;
  for (const json& s : h.at("sites")) {
    DenseTensor t(s.get<Shape>());
    for (cplx& v : t.values()) {
      const double re = get_double(is);
      const double im = get_double(is);
      v = cplx(re, im);
    }
    sites.push_back(std::move(t));
  }
  return sites;
}

}  // namespace

void save_mpo(const std::string& path, const Mpo& m, std::uint64_t seed) {
  validate_mpo(m);
  write_container(path, "mpo", m.sites, seed);
}

Mpo load_mpo(const std::string& path) {
  Mpo m;
  m.sites = read_container(path, "mpo", nullptr);
  try {
    validate_mpo(m);
  } catch (const Error& e) {
    throw IoError(std::string("corrupt mpo file: ") + e.what());
  }
  return m;
}

void save_mps(const std::string& path, const Mps& s, std::uint64_t seed) {
  validate_mps(s);
  write_container(path, "mps", s.sites, seed);
}

Mps load_mps(const std::string& path) {
  Mps s;
  s.sites = read_container(path, "mps", nullptr);
  try {
    validate_mps(s);
  } catch (const Error& e) {
    throw IoError(std::string("corrupt mps file: ") + e.what());
  }
  return s;
}

std::string read_container_header(const std::string& path) {
  json h;
  read_container(path, "", &h);
  return h.dump();
}

// ---------------------------------------------------------------- text output

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << text;
  if (!os) throw IoError("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw ArgumentError("csv row width does not match the header");
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
    os << "\n";
  }
  write_text(path, os.str());
}

RowMatrix named_operator(const std::string& name, std::size_t d) {
  if (name == "id") return RowMatrix::Identity(d, d);
  if (d != 2) throw ConfigError("operator '" + name + "' is only defined for d = 2");
  if (name == "sx" || name == "x") return pauli_x();
  if (name == "sy" || name == "y") return pauli_y();
  if (name == "sz" || name == "z") return pauli_z();
  if (name == "n") return number_op();
  if (name == "sm") return lowering_op();
  if (name == "sp") return lowering_op().adjoint();
  throw ConfigError("unknown operator name: " + name);
}

namespace {

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

std::string hamiltonian_spec_to_json(const HamiltonianSpec& s) { return detail::spec_to_json(s).dump(); }
HamiltonianSpec hamiltonian_spec_from_json(const std::string& text) { return detail::spec_from_json(parse(text)); }
std::string rule_table_to_json(const RuleTable& t) { return detail::rules_to_json(t).dump(); }
RuleTable rule_table_from_json(const std::string& text) { return detail::rules_from_json(parse(text)); }
std::string rank_report_to_json(const RankReport& r) { return detail::rank_to_json(r).dump(); }

}  // namespace tnops
