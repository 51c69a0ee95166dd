#include "conefreq/conefreq.h"

#include <fmt/format.h>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "conefreq/config.hpp"
#include "conefreq/error.hpp"
#include "conefreq/frequency.hpp"
#include "conefreq/geometry.hpp"
#include "conefreq/parallel.hpp"
#include "conefreq/pipeline.hpp"
#include "conefreq/solver.hpp"
#include "conefreq/spectral.hpp"

struct cf_mesh {
  std::shared_ptr<const conefreq::Mesh> mesh;
};

struct cf_field {
  conefreq::CoefficientSet coeffs;
  conefreq::SolutionField field;
};

struct cf_trace {
  conefreq::FrequencyTrace trace;
};

struct cf_config {
  conefreq::RunConfig config;
};

namespace {

thread_local std::string g_last_error;

cf_status set_error(cf_status status, const std::string& msg) {
  g_last_error = msg;
  return status;
}

// Runs fn, mapping exceptions onto status codes.
template <class Fn>
cf_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const conefreq::Error& e) {
    return set_error(static_cast<cf_status>(static_cast<int>(e.kind())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(CF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(CF_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(CF_ERR_INTERNAL, "unknown exception");
  }
}

#define CF_REQUIRE(ptr)                                                       \
  do {                                                                        \
    if ((ptr) == nullptr) return set_error(CF_ERR_NULL_ARGUMENT, #ptr " is NULL"); \
  } while (0)

conefreq::ParamTable parse_params(const char* text) {
  conefreq::ParamTable params;
  if (text == nullptr) return params;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      conefreq::fail(conefreq::ErrorKind::Parameter, fmt::format("params: '{}' is not key=value", item));
    std::string key = item.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    try {
      params[key] = conefreq::parse_scalar(item.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      conefreq::fail(conefreq::ErrorKind::Parameter, fmt::format("params: {}", e.what()));
    }
  }
  return params;
}

}  // namespace

extern "C" {

const char* cf_last_error(void) { return g_last_error.c_str(); }

const char* cf_status_name(cf_status status) {
  switch (status) {
    case CF_OK: return "ok";
    case CF_ERR_CHECKS_FAILED: return "checks-failed";
    case CF_ERR_NULL_ARGUMENT: return "null-argument";
    case CF_ERR_INTERNAL: return "internal";
    default:
      if (status >= CF_ERR_DOMAIN && status <= CF_ERR_IO)
        return conefreq::error_kind_name(static_cast<conefreq::ErrorKind>(static_cast<int>(status)));
      return "unknown";
  }
}

const char* cf_version(void) { return "1.0.0"; }

cf_status cf_set_threads(int threads) {
  if (threads < 0) return set_error(CF_ERR_PARAMETER, "threads must be >= 0");
  conefreq::set_max_threads(static_cast<unsigned>(threads));
  return CF_OK;
}

cf_status cf_mesh_generate(double opening, double target_h, double grading_ratio, double r_min, cf_mesh** out) {
  CF_REQUIRE(out);
  return guarded([&] {
    auto m = std::make_shared<const conefreq::Mesh>(
        conefreq::generate_mesh(conefreq::build_domain(2, opening), target_h, grading_ratio, r_min));
    *out = new cf_mesh{std::move(m)};
    return CF_OK;
  });
}

void cf_mesh_free(cf_mesh* mesh) { delete mesh; }

cf_status cf_mesh_counts(const cf_mesh* mesh, size_t* nodes, size_t* elements, size_t* facets) {
  CF_REQUIRE(mesh);
  if (nodes) *nodes = mesh->mesh->nodes.size();
  if (elements) *elements = mesh->mesh->elements.size();
  if (facets) *facets = mesh->mesh->boundary_facets.size();
  return CF_OK;
}

cf_status cf_mesh_normal_orthogonality(const cf_mesh* mesh, double* out) {
  CF_REQUIRE(mesh);
  CF_REQUIRE(out);
  return guarded([&] {
    *out = conefreq::check_normal_orthogonality(*mesh->mesh);
    return CF_OK;
  });
}

cf_status cf_mesh_ball_measures(const cf_mesh* mesh, double r, double* area, double* arc_length) {
  CF_REQUIRE(mesh);
  return guarded([&] {
    if (!(r >= mesh->mesh->grading.r_min && r <= 1.0))
      conefreq::fail(conefreq::ErrorKind::Range, fmt::format("r = {} outside [r_min, 1]", r));
    const auto bq = conefreq::ball_quadrature(*mesh->mesh, r);
    if (area) *area = bq.volume_weight_sum();
    if (arc_length) *arc_length = bq.arc_weight_sum();
    return CF_OK;
  });
}

cf_status cf_mesh_write(const cf_mesh* mesh, const char* path) {
  CF_REQUIRE(mesh);
  CF_REQUIRE(path);
  return guarded([&] {
    std::ofstream os(path, std::ios::binary);
    if (!os) conefreq::fail(conefreq::ErrorKind::Io, fmt::format("cannot write '{}'", path));
    conefreq::write_mesh(os, *mesh->mesh);
    return CF_OK;
  });
}

cf_status cf_solve(const cf_mesh* mesh, const char* preset, const char* params, const char* outer, double tol,
                   int max_iter, cf_field** out) {
  CF_REQUIRE(mesh);
  CF_REQUIRE(preset);
  CF_REQUIRE(outer);
  CF_REQUIRE(out);
  return guarded([&] {
    auto coeffs = conefreq::make_preset(preset, parse_params(params));
    auto field = conefreq::solve(mesh->mesh, coeffs, conefreq::OuterData::parse(outer), {tol, max_iter});
    *out = new cf_field{std::move(coeffs), std::move(field)};
    return CF_OK;
  });
}

void cf_field_free(cf_field* field) { delete field; }

cf_status cf_field_H(const cf_field* field, double r, double* H) {
  CF_REQUIRE(field);
  CF_REQUIRE(H);
  return guarded([&] {
    *H = conefreq::compute_H(field->field, field->coeffs, r);
    return CF_OK;
  });
}

cf_status cf_field_D_E(const cf_field* field, double r, double* D, double* E) {
  CF_REQUIRE(field);
  return guarded([&] {
    const auto [d, e] = conefreq::compute_D_E(field->field, field->coeffs, r);
    if (D) *D = d;
    if (E) *E = e;
    return CF_OK;
  });
}

cf_status cf_trace_compute(const cf_field* field, const double* radii, size_t count, cf_trace** out) {
  CF_REQUIRE(field);
  CF_REQUIRE(radii);
  CF_REQUIRE(out);
  return guarded([&] {
    auto tr = conefreq::compute_trace(field->field, field->coeffs, std::span<const double>(radii, count));
    *out = new cf_trace{std::move(tr)};
    return CF_OK;
  });
}

void cf_trace_free(cf_trace* trace) { delete trace; }

cf_status cf_trace_size(const cf_trace* trace, size_t* count) {
  CF_REQUIRE(trace);
  CF_REQUIRE(count);
  *count = trace->trace.samples.size();
  return CF_OK;
}

cf_status cf_trace_row_at(const cf_trace* trace, size_t index, cf_trace_row* row) {
  CF_REQUIRE(trace);
  CF_REQUIRE(row);
  if (index >= trace->trace.samples.size())
    return set_error(CF_ERR_RANGE, fmt::format("trace index {} out of range", index));
  const auto& s = trace->trace.samples[index];
  *row = {s.r, s.H, s.D, s.E, s.N, s.Hprime, s.dnuova_residual, s.flux_residual};
  return CF_OK;
}

cf_status cf_trace_gamma(const cf_trace* trace, double* gamma_hat) {
  CF_REQUIRE(trace);
  CF_REQUIRE(gamma_hat);
  return guarded([&] {
    *gamma_hat = conefreq::estimate_gamma(trace->trace).gamma_hat;
    return CF_OK;
  });
}

cf_status cf_gamma_from_eigenvalue(int n, double lambda, double* gamma) {
  CF_REQUIRE(gamma);
  return guarded([&] {
    *gamma = conefreq::gamma_from_eigenvalue(n, lambda);
    return CF_OK;
  });
}

cf_status cf_cap_spectrum(double alpha, int k_max, int grid_n, double* eigenvalues) {
  CF_REQUIRE(eigenvalues);
  return guarded([&] {
    const auto b = conefreq::cap_axisymmetric_spectrum(alpha, k_max, grid_n);
    for (int k = 0; k < b.size(); ++k) eigenvalues[k] = b.eigenvalues[static_cast<std::size_t>(k)];
    return CF_OK;
  });
}

cf_status cf_config_load(const char* path, cf_config** out) {
  CF_REQUIRE(path);
  CF_REQUIRE(out);
  return guarded([&] {
    *out = new cf_config{conefreq::load_config(path)};
    return CF_OK;
  });
}

cf_status cf_config_default(cf_config** out) {
  CF_REQUIRE(out);
  return guarded([&] {
    *out = new cf_config{};
    return CF_OK;
  });
}

cf_status cf_config_set(cf_config* config, const char* section, const char* key, const char* value) {
  CF_REQUIRE(config);
  CF_REQUIRE(section);
  CF_REQUIRE(key);
  CF_REQUIRE(value);
  return guarded([&] {
    // Validate on a copy so a rejected override leaves the config unchanged.
    conefreq::RunConfig next = config->config;
    conefreq::set_config_value(next, section, key, value);
    config->config = std::move(next);
    return CF_OK;
  });
}

void cf_config_free(cf_config* config) { delete config; }

const char* cf_config_out_dir(const cf_config* config) {
  return config ? config->config.out_dir.c_str() : nullptr;
}

cf_status cf_pipeline_run(const cf_config* config) {
  CF_REQUIRE(config);
  return guarded([&] {
    const auto result = conefreq::run_pipeline(config->config);
    if (result.status == 0) return CF_OK;
    std::string msg;
    for (const auto& f : result.failures()) msg += f + "\n";
    return set_error(CF_ERR_CHECKS_FAILED, msg);
  });
}

}  // extern "C"
