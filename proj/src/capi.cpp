#include "spincm/spincm.h"

#include <cstring>
#include <map>
#include <string>

#include "spincm/action_angle.hpp"
#include "spincm/run.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

spincm_status status_from_code(spincm::ErrorCode code) {
  using spincm::ErrorCode;
  switch (code) {
    case ErrorCode::NearDegenerateSpectrum: return SPINCM_ERR_NEAR_DEGENERATE_SPECTRUM;
    case ErrorCode::NoConvergence: return SPINCM_ERR_NO_CONVERGENCE;
    case ErrorCode::DecompositionFailed: return SPINCM_ERR_DECOMPOSITION_FAILED;
    case ErrorCode::BranchCut: return SPINCM_ERR_BRANCH_CUT;
    case ErrorCode::SingularDenominator: return SPINCM_ERR_SINGULAR_DENOMINATOR;
    case ErrorCode::Overflow: return SPINCM_ERR_OVERFLOW;
    case ErrorCode::SingularShiftedDifference: return SPINCM_ERR_SINGULAR_SHIFTED_DIFFERENCE;
    case ErrorCode::SingularSystem: return SPINCM_ERR_SINGULAR_SYSTEM;
    case ErrorCode::InconsistentData: return SPINCM_ERR_INCONSISTENT_DATA;
    case ErrorCode::StepTooLarge: return SPINCM_ERR_STEP_TOO_LARGE;
    case ErrorCode::InvalidArgument: return SPINCM_ERR_INVALID_ARGUMENT;
    case ErrorCode::ConfigError: return SPINCM_ERR_CONFIG;
    case ErrorCode::IoError: return SPINCM_ERR_IO;
  }
  return SPINCM_ERR_INTERNAL;
}

template <typename Fn>
spincm_status guarded(Fn&& fn) {
  try {
    fn();
    return SPINCM_OK;
  } catch (const spincm::Error& e) {
    g_last_error = e.what();
    return status_from_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SPINCM_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SPINCM_ERR_INTERNAL;
  }
}

}  // namespace

struct spincm_config {
  spincm::KeyValues kv;
};

struct spincm_cm_point {
  spincm::CMPoint point;
  spincm::GammaConvention convention = spincm::GammaConvention::ExpQ;
};

struct spincm_rs_point {
  spincm::RSPoint point;
};

extern "C" {

const char* spincm_status_name(spincm_status status) {
  switch (status) {
    case SPINCM_OK: return "ok";
    case SPINCM_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SPINCM_ERR_NEAR_DEGENERATE_SPECTRUM: return "near_degenerate_spectrum";
    case SPINCM_ERR_NO_CONVERGENCE: return "no_convergence";
    case SPINCM_ERR_DECOMPOSITION_FAILED: return "decomposition_failed";
    case SPINCM_ERR_BRANCH_CUT: return "branch_cut";
    case SPINCM_ERR_SINGULAR_DENOMINATOR: return "singular_denominator";
    case SPINCM_ERR_OVERFLOW: return "overflow";
    case SPINCM_ERR_SINGULAR_SHIFTED_DIFFERENCE: return "singular_shifted_difference";
    case SPINCM_ERR_SINGULAR_SYSTEM: return "singular_system";
    case SPINCM_ERR_INCONSISTENT_DATA: return "inconsistent_data";
    case SPINCM_ERR_STEP_TOO_LARGE: return "step_too_large";
    case SPINCM_ERR_CONFIG: return "config_error";
    case SPINCM_ERR_IO: return "io_error";
    case SPINCM_ERR_PROPERTY_FAILED: return "property_failed";
    case SPINCM_ERR_NUMERIC: return "numeric_failure";
    case SPINCM_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* spincm_last_error(void) { return g_last_error.c_str(); }

const char* spincm_version(void) { return "0.1.0"; }

void spincm_string_free(char* s) { std::free(s); }

spincm_config* spincm_config_new(void) { return new spincm_config(); }

void spincm_config_free(spincm_config* cfg) { delete cfg; }

spincm_status spincm_config_set(spincm_config* cfg, const char* key, const char* value) {
  if (cfg == nullptr || key == nullptr || value == nullptr) {
    g_last_error = "null argument";
    return SPINCM_ERR_INVALID_ARGUMENT;
  }
  cfg->kv[key] = value;
  return SPINCM_OK;
}

const char* spincm_config_get(const spincm_config* cfg, const char* key) {
  if (cfg == nullptr || key == nullptr) return nullptr;
  const auto it = cfg->kv.find(key);
  return it == cfg->kv.end() ? nullptr : it->second.c_str();
}

spincm_status spincm_config_load_file(spincm_config* cfg, const char* path) {
  if (cfg == nullptr || path == nullptr) {
    g_last_error = "null argument";
    return SPINCM_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    for (const auto& [key, value] : spincm::load_config_file(path)) cfg->kv[key] = value;
  });
}

namespace {

spincm_status run_wrapper(const spincm_config* cfg, char** out,
                          spincm::RunArtifacts (*runner)(const spincm::RunConfig&),
                          bool fail_on_halt) {
  if (cfg == nullptr || out == nullptr) {
    g_last_error = "null argument";
    return SPINCM_ERR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  spincm::RunArtifacts art;
  const spincm_status st = guarded([&] {
    const spincm::RunConfig config = spincm::config_from_kv(cfg->kv);
    art = runner(config);
  });
  if (st != SPINCM_OK) return st;
  *out = dup_string(art.summary_json);
  if (fail_on_halt && !art.pass) {
    g_last_error = "run halted: " + art.halted_reason;
    return SPINCM_ERR_NUMERIC;
  }
  return SPINCM_OK;
}

}  // namespace

spincm_status spincm_run_simulate(const spincm_config* cfg, char** summary_json) {
  return run_wrapper(cfg, summary_json, spincm::run_simulate, /*fail_on_halt=*/true);
}

spincm_status spincm_run_exact(const spincm_config* cfg, char** summary_json) {
  return run_wrapper(cfg, summary_json, spincm::run_exact, /*fail_on_halt=*/false);
}

spincm_status spincm_run_check(const spincm_config* cfg, const char* suite, char** report_json) {
  if (cfg == nullptr || suite == nullptr || report_json == nullptr) {
    g_last_error = "null argument";
    return SPINCM_ERR_INVALID_ARGUMENT;
  }
  *report_json = nullptr;
  spincm::RunArtifacts art;
  const spincm_status st = guarded([&] {
    const spincm::RunConfig config = spincm::config_from_kv(cfg->kv);
    art = spincm::run_check(config, spincm::suite_from_name(suite));
  });
  if (st != SPINCM_OK) return st;
  *report_json = dup_string(art.summary_json);
  if (!art.pass) {
    g_last_error = std::string("check suite failed: ") + suite;
    return SPINCM_ERR_PROPERTY_FAILED;
  }
  return SPINCM_OK;
}

spincm_status spincm_run_degeneration_scan(const spincm_config* cfg, char** summary_json) {
  return run_wrapper(cfg, summary_json, spincm::run_degeneration_scan, /*fail_on_halt=*/false);
}

spincm_status spincm_cm_point_parse(const char* json, spincm_cm_point** out) {
  if (json == nullptr || out == nullptr) {
    g_last_error = "null argument";
    return SPINCM_ERR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&] {
    auto [cm, conv] = spincm::cm_point_from_json(json);
    auto* handle = new spincm_cm_point();
    handle->point = std::move(cm);
    handle->convention = conv;
    *out = handle;
  });
}

spincm_status spincm_cm_point_to_json(const spincm_cm_point* pt, char** json) {
  if (pt == nullptr || json == nullptr) {
    g_last_error = "null argument";
    return SPINCM_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const spincm::CartanData cartan(pt->point.n(), pt->convention);
    *json = dup_string(spincm::cm_point_to_json(pt->point, cartan));
  });
}

void spincm_cm_point_free(spincm_cm_point* pt) { delete pt; }

int spincm_cm_point_dim(const spincm_cm_point* pt) { return pt == nullptr ? 0 : pt->point.n(); }

spincm_status spincm_rs_point_parse(const char* json, spincm_rs_point** out) {
  if (json == nullptr || out == nullptr) {
    g_last_error = "null argument";
    return SPINCM_ERR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&] {
    auto* handle = new spincm_rs_point();
    handle->point = spincm::rs_point_from_json(json);
    *out = handle;
  });
}

spincm_status spincm_rs_point_to_json(const spincm_rs_point* pt, char** json) {
  if (pt == nullptr || json == nullptr) {
    g_last_error = "null argument";
    return SPINCM_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] { *json = dup_string(spincm::rs_point_to_json(pt->point)); });
}

void spincm_rs_point_free(spincm_rs_point* pt) { delete pt; }

int spincm_rs_point_dim(const spincm_rs_point* pt) { return pt == nullptr ? 0 : pt->point.n(); }

spincm_status spincm_cm_exact_flow(const spincm_cm_point* pt, int k, double t,
                                   spincm_cm_point** out) {
  if (pt == nullptr || out == nullptr) {
    g_last_error = "null argument";
    return SPINCM_ERR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&] {
    const spincm::CartanData cartan(pt->point.n(), pt->convention);
    auto* handle = new spincm_cm_point();
    handle->point = spincm::exact_flow_cm(pt->point, k, t, cartan);
    handle->convention = pt->convention;
    *out = handle;
  });
}

spincm_status spincm_rs_exact_flow(const spincm_rs_point* pt, int k, double t,
                                   spincm_rs_point** out) {
  if (pt == nullptr || out == nullptr) {
    g_last_error = "null argument";
    return SPINCM_ERR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&] {
    auto* handle = new spincm_rs_point();
    handle->point = spincm::exact_flow_rs(pt->point, k, t);
    *out = handle;
  });
}

spincm_status spincm_cm_invariants(const spincm_cm_point* pt, int kmax, double* out_re,
                                   double* out_im) {
  if (pt == nullptr || out_re == nullptr || out_im == nullptr) {
    g_last_error = "null argument";
    return SPINCM_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const spincm::CartanData cartan(pt->point.n(), pt->convention);
    const spincm::Vector inv =
        spincm::invariants_x(spincm::lift_to_cotangent(pt->point, cartan), kmax);
    for (int i = 0; i < inv.size(); ++i) {
      out_re[i] = inv(i).real();
      out_im[i] = inv(i).imag();
    }
  });
}

spincm_status spincm_cm_hamiltonian(const spincm_cm_point* pt, double* out_re, double* out_im) {
  if (pt == nullptr || out_re == nullptr || out_im == nullptr) {
    g_last_error = "null argument";
    return SPINCM_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const spincm::CartanData cartan(pt->point.n(), pt->convention);
    const spincm::cplx h = spincm::hamiltonian_cm(pt->point, cartan);
    *out_re = h.real();
    *out_im = h.imag();
  });
}

namespace {

spincm_status vector_out(const spincm::Vector& v, double* out_re, double* out_im) {
  for (int i = 0; i < v.size(); ++i) {
    out_re[i] = v(i).real();
    out_im[i] = v(i).imag();
  }
  return SPINCM_OK;
}

}  // namespace

spincm_status spincm_cm_actions(const spincm_cm_point* pt, double* out_re, double* out_im) {
  if (pt == nullptr || out_re == nullptr || out_im == nullptr) {
    g_last_error = "null argument";
    return SPINCM_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const spincm::CartanData cartan(pt->point.n(), pt->convention);
    vector_out(spincm::cm_actions(pt->point, cartan), out_re, out_im);
  });
}

spincm_status spincm_cm_angles(const spincm_cm_point* pt, double* out_re, double* out_im) {
  if (pt == nullptr || out_re == nullptr || out_im == nullptr) {
    g_last_error = "null argument";
    return SPINCM_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const spincm::CartanData cartan(pt->point.n(), pt->convention);
    vector_out(spincm::cm_angles(pt->point, cartan).angles, out_re, out_im);
  });
}

spincm_status spincm_rs_actions(const spincm_rs_point* pt, double* out_re, double* out_im) {
  if (pt == nullptr || out_re == nullptr || out_im == nullptr) {
    g_last_error = "null argument";
    return SPINCM_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] { vector_out(spincm::rs_actions(pt->point), out_re, out_im); });
}

spincm_status spincm_rs_angles(const spincm_rs_point* pt, double* out_re, double* out_im) {
  if (pt == nullptr || out_re == nullptr || out_im == nullptr) {
    g_last_error = "null argument";
    return SPINCM_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] { vector_out(spincm::rs_angles(pt->point).angles, out_re, out_im); });
}

}  // extern "C"
