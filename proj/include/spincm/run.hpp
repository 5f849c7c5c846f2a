#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spincm/action_angle.hpp"
#include "spincm/rank1_kks.hpp"

namespace spincm {

enum class SuiteKind { Brackets, Integrability, Duality, Degeneration, Angles };
SuiteKind suite_from_name(const std::string& name);
const char* suite_name(SuiteKind kind);

// Flat key = value configuration (section headers are allowed and ignored).
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_config_text(const std::string& text);
KeyValues load_config_file(const std::string& path);

struct RunConfig {
  int n = 3;
  GammaConvention convention = GammaConvention::ExpQ;
  SystemKind system = SystemKind::SpinCM;
  OrbitTag orbit = OrbitTag::Rank1;
  int k = 2;
  double t_final = 1.0;
  double dt = 1e-3;
  int sample_every = 10;
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  std::string point_file;
  std::string point_json;  // inline JSON, wins over point_file
  std::vector<double> q, p, phi, psi, h, g_diag;
  double kappa = 0.0;
  bool kappa_set = false;
  double collision_tol = 1e-6;
  GaussOrdering gauss_ordering = GaussOrdering::PlusMinusZero;
  std::vector<double> s_values;
  std::vector<double> eps_cartan;
  std::map<std::string, double> tolerance_overrides;  // keys "tol.<property>"

  CartanData cartan() const { return CartanData(n, convention); }
};

RunConfig config_from_kv(const KeyValues& kv);

struct RunArtifacts {
  std::string summary_json;
  bool pass = true;
  std::string halted_reason = "completed";
};

// simulate: RK4 trajectory CSV (trajectory.csv) + summary JSON.
RunArtifacts run_simulate(const RunConfig& config);
// exact: sampled exact flow on the same time grid and CSV schema (exact.csv).
RunArtifacts run_exact(const RunConfig& config);
// check: one named property suite; JSON report (check_<suite>.json).
RunArtifacts run_check(const RunConfig& config, SuiteKind suite);
// scan: degeneration table (degeneration.csv) + summary JSON.
RunArtifacts run_degeneration_scan(const RunConfig& config);

// Initial data resolution: inline JSON, then point file, then inline
// coordinate lists, then a seeded sample.
CMPoint initial_cm_point(const RunConfig& config);
RSPoint initial_rs_point(const RunConfig& config);

// Deterministic escape-type rank-1 point used by the desk-scale suites:
// ascending q, outward momenta, weak generic spin.  Momentum-dominated so
// the Lax spectrum is real and well separated (a stable Weyl gauge).
CMPoint standard_rank1_point(int n, double spread = 1.2, double momentum = 1.6,
                             double kappa0 = 0.12);

// Seeded generic samples for property suites.
struct Rng {
  explicit Rng(std::uint64_t seed);
  double uniform(double lo, double hi);
  std::uint64_t raw();

 private:
  std::uint64_t state_;
};
CMPoint random_cm_point(Rng& rng, int n, OrbitTag orbit, const CartanData& cartan);

// Structural check: the bracket of two random zero-weight mu monomials
// expands in zero-weight monomials only.
bool zero_weight_closure_check(int n, int max_cycles, unsigned seed, int trials);

// Double formatted with full precision (%.17e), used by every CSV writer.
std::string format_full(double v);

}  // namespace spincm
