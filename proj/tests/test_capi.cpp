// Exercises the shared library through its C interface only.
#include <conefreq/conefreq.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {
constexpr double kHalfPi = 1.5707963267948966;
}

TEST_SUITE("capi") {
  TEST_CASE("status names and null arguments") {
    CHECK(std::string(cf_status_name(CF_OK)) == "ok");
    CHECK(std::string(cf_status_name(CF_ERR_CONFIG)) == "config");
    CHECK(std::string(cf_status_name(CF_ERR_CHECKS_FAILED)) == "checks-failed");
    CHECK(cf_mesh_generate(kHalfPi, 0.1, 0.7, 1e-3, nullptr) == CF_ERR_NULL_ARGUMENT);
    CHECK(std::string(cf_last_error()).find("NULL") != std::string::npos);
    CHECK(cf_set_threads(-2) == CF_ERR_PARAMETER);
    CHECK(cf_set_threads(0) == CF_OK);
    cf_mesh_free(nullptr);
    cf_field_free(nullptr);
    cf_trace_free(nullptr);
    cf_config_free(nullptr);
  }

  TEST_CASE("mesh, solve and trace") {
    cf_mesh* mesh = nullptr;
    REQUIRE(cf_mesh_generate(kHalfPi, 0.04, 0.7, 1e-3, &mesh) == CF_OK);
    size_t nodes = 0, elems = 0, facets = 0;
    CHECK(cf_mesh_counts(mesh, &nodes, &elems, &facets) == CF_OK);
    CHECK(nodes > 100);
    CHECK(elems > nodes);
    double orth = 1.0, area = 0.0, arc = 0.0;
    CHECK(cf_mesh_normal_orthogonality(mesh, &orth) == CF_OK);
    CHECK(orth <= 1e-12);
    CHECK(cf_mesh_ball_measures(mesh, 0.5, &area, &arc) == CF_OK);
    CHECK(area == doctest::Approx(kHalfPi * 0.125));
    CHECK(arc == doctest::Approx(kHalfPi * 0.5));
    CHECK(cf_mesh_ball_measures(mesh, 2.0, &area, &arc) == CF_ERR_RANGE);

    cf_field* field = nullptr;
    CHECK(cf_solve(mesh, "nope", nullptr, "eigen:2", 1e-10, 50, &field) == CF_ERR_PARAMETER);
    CHECK(cf_solve(mesh, "power_weight", "delta=", "eigen:2", 1e-10, 50, &field) == CF_ERR_PARAMETER);
    CHECK(cf_solve(mesh, "constant", nullptr, "eigen:0", 1e-10, 50, &field) == CF_ERR_PARAMETER);
    REQUIRE(cf_solve(mesh, "power_weight", "delta=0.5, a=1", "eigen:2", 1e-10, 50, &field) == CF_OK);
    double H = 0.0, D = 0.0, E = 0.0;
    CHECK(cf_field_H(field, 0.5, &H) == CF_OK);
    CHECK(cf_field_D_E(field, 0.5, &D, &E) == CF_OK);
    CHECK(H > 0.0);
    CHECK(D / H == doctest::Approx(2.0).epsilon(0.1));

    std::vector<double> radii;
    for (int i = 0; i < 10; ++i) radii.push_back(0.05 * std::pow(16.0, i / 9.0));
    cf_trace* trace = nullptr;
    CHECK(cf_trace_compute(field, radii.data(), 3, &trace) == CF_ERR_RANGE);
    REQUIRE(cf_trace_compute(field, radii.data(), radii.size(), &trace) == CF_OK);
    size_t n = 0;
    CHECK(cf_trace_size(trace, &n) == CF_OK);
    CHECK(n == radii.size());
    cf_trace_row row;
    CHECK(cf_trace_row_at(trace, 0, &row) == CF_OK);
    CHECK(row.r == radii[0]);
    CHECK(row.N == doctest::Approx(row.D / row.H));
    CHECK(cf_trace_row_at(trace, n, &row) == CF_ERR_RANGE);
    double gamma = 0.0;
    CHECK(cf_trace_gamma(trace, &gamma) == CF_OK);
    CHECK(gamma == doctest::Approx(2.0).epsilon(2e-2));

    const fs::path p = fs::temp_directory_path() / ("conefreq_capi_mesh_" + std::to_string(::getpid()) + ".txt");
    CHECK(cf_mesh_write(mesh, p.c_str()) == CF_OK);
    CHECK(fs::file_size(p) > 0);
    fs::remove(p);
    CHECK(cf_mesh_write(mesh, "/nonexistent/dir/mesh.txt") == CF_ERR_IO);

    cf_trace_free(trace);
    cf_field_free(field);
    cf_mesh_free(mesh);
  }

  TEST_CASE("spectrum helpers") {
    double g = 0.0;
    CHECK(cf_gamma_from_eigenvalue(3, 6.0, &g) == CF_OK);
    CHECK(g == 2.0);
    CHECK(cf_gamma_from_eigenvalue(2, -1.0, &g) == CF_ERR_RANGE);
    double eig[3];
    CHECK(cf_cap_spectrum(kHalfPi, 3, 2000, eig) == CF_OK);
    CHECK(eig[2] == doctest::Approx(20.0).epsilon(1e-4));
    CHECK(cf_cap_spectrum(3.0, 3, 2000, eig) == CF_ERR_DOMAIN);
  }

  TEST_CASE("config and pipeline") {
    cf_config* cfg = nullptr;
    CHECK(cf_config_load("/nonexistent.ini", &cfg) == CF_ERR_IO);
    REQUIRE(cf_config_default(&cfg) == CF_OK);
    const fs::path out = fs::temp_directory_path() / ("conefreq_capi_run_" + std::to_string(::getpid()));
    CHECK(cf_config_set(cfg, "output", "dir", out.c_str()) == CF_OK);
    CHECK(std::string(cf_config_out_dir(cfg)) == out.string());
    CHECK(cf_config_set(cfg, "r_grid", "r_lo", "1e-6") == CF_ERR_CONFIG);
    CHECK(std::string(cf_last_error()).find("r_grid.r_lo") != std::string::npos);
    CHECK(cf_config_set(cfg, "run", "stage", "spectrum") == CF_OK);
    CHECK(cf_pipeline_run(cfg) == CF_OK);
    CHECK(fs::exists(out / "spectrum.csv"));

    // Requiring hypotheses that log_weight violates gives a failed-check status.
    CHECK(cf_config_set(cfg, "coefficients", "preset", "log_weight") == CF_OK);
    CHECK(cf_config_set(cfg, "mesh", "h", "0.05") == CF_OK);
    CHECK(cf_config_set(cfg, "run", "stage", "validate") == CF_OK);
    CHECK(cf_pipeline_run(cfg) == CF_ERR_CHECKS_FAILED);
    CHECK(std::string(cf_last_error()).find("validate.MUCK") != std::string::npos);
    fs::remove_all(out);
    cf_config_free(cfg);
  }
}
