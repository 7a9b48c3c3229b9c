#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "oracle.hpp"
#include "tnops/io.hpp"
#include "tnops/jobs.hpp"

using namespace tnops;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tnops_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Io, MpoContainerRoundTrip) {
  const fs::path dir = scratch("mpo");
  const Mpo a = random_mpo(5, 2, 3, 1);
  save_mpo((dir / "a.tnops").string(), a, 42);
  const Mpo b = load_mpo((dir / "a.tnops").string());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.sites[k].shape(), b.sites[k].shape());
    EXPECT_EQ(a.sites[k].values(), b.sites[k].values());
  }
  const auto h = nlohmann::json::parse(read_container_header((dir / "a.tnops").string()));
  EXPECT_EQ(h["kind"], "mpo");
  EXPECT_EQ(h["dtype"], "complex128");
  EXPECT_EQ(h["endianness"], "little");
  EXPECT_EQ(h["seed"], 42);
  EXPECT_THROW(load_mps((dir / "a.tnops").string()), IoError);
}

TEST(Io, MpsContainerRoundTrip) {
  const fs::path dir = scratch("mps");
  const Mps s = random_mps(6, 2, 4, 2);
  save_mps((dir / "s.tnops").string(), s);
  EXPECT_EQ(to_dense_vector(load_mps((dir / "s.tnops").string())), to_dense_vector(s));
}

TEST(Io, CorruptFilesRejected) {
  const fs::path dir = scratch("corrupt");
  write_text((dir / "bad.tnops").string(), "not a container");
  EXPECT_THROW(load_mpo((dir / "bad.tnops").string()), IoError);
  EXPECT_THROW(load_mpo((dir / "missing.tnops").string()), IoError);
  save_mpo((dir / "t.tnops").string(), random_mpo(4, 2, 2, 3));
  std::string bytes = read_text((dir / "t.tnops").string());
  bytes.resize(bytes.size() - 16);
  write_text((dir / "t.tnops").string(), bytes);
  EXPECT_THROW(load_mpo((dir / "t.tnops").string()), IoError);
}

TEST(Io, CsvSeventeenDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(format_double(std::nan("")), "nan");
  const fs::path dir = scratch("csv");
  write_csv((dir / "t.csv").string(), {"a", "b"}, {{1.0, 0.5}});
  EXPECT_EQ(read_text((dir / "t.csv").string()), "a,b\n1,0.5\n");
  EXPECT_THROW(write_csv((dir / "t.csv").string(), {"a"}, {{1.0, 2.0}}), ArgumentError);
}

TEST(Io, HamiltonianSpecRoundTrip) {
  HamiltonianSpec s;
  s.kind = HamiltonianKind::PolyExp;
  s.n_sites = 7;
  s.b_coeffs = {2.0, 1.0};
  s.alpha_coeffs = {0.9, 0.5};
  s.powers = {0, 1};
  s.ops = {pauli_x(), pauli_y()};
  s.local = pauli_z();
  s.model.name = "rydberg";
  s.model.sigma = 0.1;
  const std::string a = hamiltonian_spec_to_json(s);
  const HamiltonianSpec t = hamiltonian_spec_from_json(a);
  EXPECT_EQ(hamiltonian_spec_to_json(t), a);
  EXPECT_LT(oracle::rel(build_hamiltonian(t), to_dense_matrix(build_hamiltonian(s))), 1e-15);
  EXPECT_THROW(hamiltonian_spec_from_json("{\"kind\":\"model\",\"n_sites\":4}"), ConfigError);
  EXPECT_THROW(hamiltonian_spec_from_json("{\"n_sites\":\"four\"}"), ConfigError);
  EXPECT_THROW(hamiltonian_spec_from_json("[1,2"), ConfigError);
}

TEST(Io, NamedOperators) {
  EXPECT_EQ(named_operator("sx"), pauli_x());
  EXPECT_EQ(named_operator("sp"), RowMatrix(lowering_op().adjoint()));
  EXPECT_EQ(named_operator("id", 3), RowMatrix(RowMatrix::Identity(3, 3)));
  EXPECT_THROW(named_operator("sq"), ConfigError);
}

TEST(Io, RuleTableRoundTrip) {
  const RuleTable rt = exp_decay_rules(pauli_x(), pauli_y(), 0.4, 5, true);
  const std::string a = rule_table_to_json(rt);
  const RuleTable b = rule_table_from_json(a);
  EXPECT_EQ(rule_table_to_json(b), a);
  EXPECT_LT(oracle::rel(from_rules(b, 5, 2), to_dense_matrix(from_rules(rt, 5, 2))), 1e-15);
  const auto j = nlohmann::json::parse(a);
  EXPECT_TRUE(j["rules"][0].contains("weight_re"));
  EXPECT_TRUE(j["rules"][0]["op"][0][0].is_array());
}

TEST(Jobs, ConfigRoundTripIsIdentity) {
  const std::string cfg =
      R"({"seed":5,"hamiltonian":{"kind":"model","n_sites":6,"model":{"name":"xxz","theta":0.2}},)"
      R"("evolution":{"method":"trotter","pairs":[[1,4]]},"peps":{"side":3,"mode":"sqrt","kind":"longRange"}})";
  const std::string once = normalize_config("evolve", cfg);
  EXPECT_EQ(normalize_config("evolve", once), once);
  EXPECT_THROW(normalize_config("build", R"({"evolution":{"method":"euler"}})"), ConfigError);
}

TEST(Jobs, BuildReportsBond) {
  JobOptions o;
  o.command = "build";
  o.config_json = R"({"hamiltonian":{"kind":"nearestNeighbor","n_sites":8,"ops":["sz","sz"]}})";
  o.out_dir = scratch("build").string();
  const JobResult r = run_job(o);
  EXPECT_EQ(r.status, JobStatus::Ok) << r.error;
  EXPECT_NE(r.summary.find("D=3"), std::string::npos);
  EXPECT_EQ(load_mpo(o.out_dir + "/mpo.tnops").max_bond(), 3u);
  EXPECT_TRUE(fs::exists(o.out_dir + "/meta.json"));
}

TEST(Jobs, ExitCodes) {
  JobOptions o;
  o.out_dir = scratch("codes").string();
  o.command = "frobnicate";
  EXPECT_EQ(run_job(o).status, JobStatus::Config);
  o.command = "build";
  o.config_json = "{";
  EXPECT_EQ(run_job(o).status, JobStatus::Config);
  o.config_json = R"({"hamiltonian":{"kind":"model","n_sites":6,"model":{"name":"nonesuch"}}})";
  EXPECT_EQ(run_job(o).status, JobStatus::Config);
  o.command = "ground";
  o.config_json = R"({"hamiltonian":{"kind":"model","n_sites":8,"model":{"name":"ising"}},"groundstate":{"chi":4,"max_sweeps":1,"energy_tol":1e-15}})";
  const JobResult r = run_job(o);
  EXPECT_EQ(r.status, JobStatus::NotConverged);
  EXPECT_TRUE(fs::exists(o.out_dir + "/ground.json"));
}

TEST(Jobs, RerunsAreByteIdentical) {
  const std::string cfg =
      R"({"seed":11,"hamiltonian":{"kind":"model","n_sites":8,"model":{"name":"spinglass","seed":3}},)"
      R"("compression":{"d_list":[2,3,4],"init":"random"},"groundstate":{"chi":8}})";
  std::string first;
  for (int run = 0; run < 2; ++run) {
    JobOptions o;
    o.command = "truncation-study";
    o.config_json = cfg;
    o.out_dir = scratch("rerun" + std::to_string(run)).string();
    o.workers = run == 0 ? 1 : 3;
    const JobResult r = run_job(o);
    ASSERT_TRUE(r.status == JobStatus::Ok || r.status == JobStatus::NotConverged) << r.error;
    const std::string csv = read_text(o.out_dir + "/truncation.csv") + read_text(o.out_dir + "/truncation.json");
    if (run == 0)
      first = csv;
    else
      EXPECT_EQ(csv, first);
  }
}

TEST(Jobs, ProbePowerIsing) {
  JobOptions o;
  o.command = "probe-power";
  o.config_json = R"({"hamiltonian":{"kind":"model","n_sites":40,"model":{"name":"ising"}},"probe":{"n":4}})";
  o.out_dir = scratch("probe").string();
  const JobResult r = run_job(o);
  ASSERT_EQ(r.status, JobStatus::Ok) << r.error;
  const auto j = nlohmann::json::parse(read_text(o.out_dir + "/powers.json"));
  EXPECT_EQ(j["powers"][3]["D_exact"], 12);
}

TEST(Jobs, EvolveAndPepsJobs) {
  JobOptions o;
  o.command = "evolve";
  o.config_json =
      R"({"hamiltonian":{"kind":"model","n_sites":8,"model":{"name":"xxz"}},)"
      R"("evolution":{"steps":3,"chi":16,"initial":"domain_wall","pairs":[[1,6]],"doublings":2}})";
  o.out_dir = scratch("evolve").string();
  JobResult r = run_job(o);
  ASSERT_EQ(r.status, JobStatus::Ok) << r.error;
  const std::string csv = read_text(o.out_dir + "/evolution.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,norm,energy,bond,distance,flagged,c_1_6");

  o.command = "peps-build";
  o.config_json = R"({"peps":{"side":3,"kind":"longRange"}})";
  o.out_dir = scratch("pepsb").string();
  r = run_job(o);
  ASSERT_EQ(r.status, JobStatus::Ok) << r.error;
  const auto j = nlohmann::json::parse(read_text(o.out_dir + "/pepo.json"));
  EXPECT_LT(j["dense_relative_error"].get<double>(), 1e-11);

  o.command = "peps-expect";
  o.config_json = R"({"peps":{"side":2,"state":"product","d_cut":[4]}})";
  o.out_dir = scratch("pepse").string();
  r = run_job(o);
  ASSERT_EQ(r.status, JobStatus::Ok) << r.error;
  const auto k = nlohmann::json::parse(read_text(o.out_dir + "/peps.json"));
  EXPECT_EQ(k["boundary"][0]["re"].get<double>(), 4.0);
}
