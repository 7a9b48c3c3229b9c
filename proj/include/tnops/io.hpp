#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tnops/hamiltonians.hpp"
#include "tnops/mpo.hpp"
#include "tnops/mps.hpp"
#include "tnops/optimality.hpp"

namespace tnops {

// Container: "TNOPS1\n", 8-byte little-endian header length, JSON header, then raw
// little-endian complex doubles (re, im) for each site tensor in site order.
void save_mpo(const std::string& path, const Mpo& m, std::uint64_t seed = 0);
Mpo load_mpo(const std::string& path);
void save_mps(const std::string& path, const Mps& s, std::uint64_t seed = 0);
Mps load_mps(const std::string& path);
std::string read_container_header(const std::string& path);

std::string format_double(double v);  // 17 significant digits
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

// Named single-site operators: id, sx, sy, sz, n, sm (|0><1|), sp (|1><0|).
RowMatrix named_operator(const std::string& name, std::size_t d = 2);

std::string hamiltonian_spec_to_json(const HamiltonianSpec& s);
HamiltonianSpec hamiltonian_spec_from_json(const std::string& text);
std::string rule_table_to_json(const RuleTable& t);
RuleTable rule_table_from_json(const std::string& text);
std::string rank_report_to_json(const RankReport& r);

}  // namespace tnops
