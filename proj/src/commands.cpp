#include "qes/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "qes/bethe.hpp"
#include "qes/numeric.hpp"

namespace qes::cli {

namespace fs = std::filesystem;

namespace {

int log_level() {
    const char* v = std::getenv("QES_LOG");
    if (!v) return 1;
    std::string s(v);
    if (s == "quiet") return 0;
    if (s == "debug") return 2;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[qes] " << msg << "\n";
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_root(const std::complex<double>& z) {
    if (std::abs(z.imag()) < 1e-12 * (1 + std::abs(z))) return fmt(z.real());
    std::string s = fmt(z.real());
    s += z.imag() < 0 ? "-" : "+";
    s += fmt(std::abs(z.imag()));
    s += "i";
    return s;
}

// All artifacts are written to a temp file and renamed into place.
void write_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + path.string());
        out << content;
    }
    fs::rename(tmp, path);
}

JobConfig load(const std::string& path, const CliOptions& opts) {
    JobConfig cfg = parse_config(path);
    if (opts.out_dir) cfg.out_dir = *opts.out_dir;
    if (opts.grid) cfg.grid = *opts.grid;
    return cfg;
}

struct LevelRun {
    int level = 0;
    std::vector<models::QuasiExactSolution> solutions; // certified ones
    std::string failure;                               // set when nothing certified
};

// Calibrate (when a free coefficient is designated) or solve directly.
LevelRun run_level(const JobConfig& cfg, int n) {
    LevelRun run;
    run.level = n;
    try {
        if (cfg.free_coefficient) {
            if (!cfg.window)
                throw ConfigError("free coefficient designated but no window given");
            auto cal = models::calibrate(cfg.model(), *cfg.free_coefficient, cfg.case_tag, n,
                                         cfg.window->first, cfg.window->second, cfg.samples);
            for (auto& c : cal) run.solutions.push_back(c.solution);
            if (run.solutions.empty()) run.failure = "no calibrated point in the scan window";
        } else {
            auto sols = models::solve_level(cfg.model(), cfg.case_tag, n);
            for (auto& s : sols)
                if (s.valid) run.solutions.push_back(std::move(s));
            if (run.solutions.empty())
                run.failure = "no root-system solution satisfies the family constraints";
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& err) {
        run.failure = err.what();
    }
    return run;
}

double worst_family_residual(const models::QuasiExactSolution& s) {
    double w = 0;
    for (const auto& fr : s.family_residuals) w = std::max(w, fr.value);
    for (double v : s.report.w_residuals) w = std::max(w, v);
    return w;
}

} // namespace

// ---------------------------------------------------------------------------

int cmd_solve(const std::string& config_path, const CliOptions& opts) {
    JobConfig cfg;
    try {
        cfg = load(config_path, opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    int max_level = 0;
    for (int n : cfg.levels) max_level = std::max(max_level, n);

    std::ostringstream csv;
    csv << "family,case,n,E_squared,epsilon_squared";
    for (int k = 1; k <= max_level; ++k) csv << ",root_" << k;
    csv << ",max_bethe_residual,max_constraint_residual,radial_residual,physical_flag\n";

    std::ostringstream report;
    report << "solve report: " << models::family_name(cfg.family) << " / "
           << models::case_name(cfg.case_tag) << ", M = " << fmt(cfg.M) << ", m = " << cfg.m
           << "\n";

    bool all_certified = true;
    int wf_index = 0;
    for (int n : cfg.levels) {
        LevelRun run = run_level(cfg, n);
        if (!run.failure.empty()) {
            all_certified = false;
            report << "level " << n << ": FAILED to certify: " << run.failure << "\n";
            continue;
        }
        for (const auto& sol : run.solutions) {
            models::RadialSampler phi = models::assemble_wavefunction(sol);
            double rres = numeric::radial_residual(
                sol.model, [&](double r) { return phi(r); }, sol.epsilon_squared, cfg.grid);

            csv << models::family_name(cfg.family) << "," << models::case_name(cfg.case_tag)
                << "," << n << "," << fmt(sol.energy_squared) << ","
                << fmt(sol.epsilon_squared);
            for (int k = 0; k < max_level; ++k)
                csv << ","
                    << (k < static_cast<int>(sol.roots.roots.size())
                            ? fmt_root(sol.roots.roots[k])
                            : "NA");
            csv << "," << fmt(sol.roots.max_bethe_residual) << ","
                << fmt(worst_family_residual(sol)) << "," << fmt(rres) << ","
                << (sol.physical ? 1 : 0) << "\n";

            report << "level " << n << ": E^2 = " << fmt(sol.energy_squared)
                   << ", eps^2 = " << fmt(sol.epsilon_squared)
                   << ", radial residual = " << fmt(rres) << "\n";
            for (const auto& fr : sol.family_residuals)
                report << "  constraint " << fr.name << ": " << fmt(fr.value) << "\n";
            if (cfg.case_tag == models::CaseTag::CoulombLike) {
                double printed = models::energy_squared_printed(sol.model, cfg.case_tag, n);
                report << "  printed closed form E^2 = " << fmt(printed)
                       << "  (primitive relations give " << fmt(sol.energy_squared)
                       << ", difference " << fmt(printed - sol.energy_squared) << ")\n";
            }

            // wavefunction table for this solution
            std::ostringstream wf;
            wf << "r,phi_lower,phi_upper\n";
            bool spinor_ok = true;
            try {
                (void)models::assemble_spinor(sol, cfg.grid.r_min + 0.1, 0.0);
            } catch (const std::exception&) {
                spinor_ok = false;
            }
            for (double r : cfg.grid.points()) {
                wf << fmt(r) << "," << fmt(phi(r)) << ",";
                if (spinor_ok) {
                    double E = std::sqrt(sol.energy_squared);
                    double up = (phi.derivative(r) -
                                 (sol.model.m / r + r * sol.model.coupling(r)) * phi(r)) /
                                (E - sol.model.M);
                    wf << fmt(up);
                } else {
                    wf << "NA";
                }
                wf << "\n";
            }
            write_atomic(fs::path(cfg.out_dir) / ("wavefunction_n" + std::to_string(wf_index) +
                                                  ".csv"),
                         wf.str());
            ++wf_index;
        }
    }

    write_atomic(fs::path(cfg.out_dir) / "spectrum.csv", csv.str());
    write_atomic(fs::path(cfg.out_dir) / "report.txt", report.str());
    log_info("wrote " + (fs::path(cfg.out_dir) / "spectrum.csv").string());
    return all_certified ? 0 : 3;
}

// ---------------------------------------------------------------------------

int cmd_verify(const std::string& config_path, const CliOptions& opts) {
    JobConfig cfg;
    try {
        cfg = load(config_path, opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    std::vector<std::string> checks = cfg.verify_checks;
    if (checks.empty()) {
        checks = {"residual", "fd", "norm"};
        if (!cfg.degeneration_scales.empty()) checks.push_back("degeneration");
    }

    bool all_pass = true;
    auto emit = [&](bool ok, const std::string& name, const std::string& detail) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
        if (!ok) all_pass = false;
    };

    std::vector<models::QuasiExactSolution> sols;
    for (int n : cfg.levels) {
        LevelRun run = run_level(cfg, n);
        if (!run.failure.empty()) {
            emit(false, "solve", "level " + std::to_string(n) + ": " + run.failure);
            continue;
        }
        for (auto& s : run.solutions) sols.push_back(std::move(s));
    }

    for (const auto& check : checks) {
        if (check == "residual") {
            for (const auto& sol : sols) {
                models::RadialSampler phi = models::assemble_wavefunction(sol);
                double rres = numeric::radial_residual(
                    sol.model, [&](double r) { return phi(r); }, sol.epsilon_squared, cfg.grid);
                emit(rres < 1e-8, "residual",
                     "n=" + std::to_string(sol.level) + " radial residual " + fmt(rres));
            }
        } else if (check == "fd") {
            for (const auto& sol : sols) {
                try {
                    auto est = numeric::fd_eigensolve(sol.model, cfg.grid, 6);
                    double best = std::numeric_limits<double>::infinity();
                    for (double ev : est.eigenvalues)
                        best = std::min(best, std::abs(ev - sol.epsilon_squared));
                    double rel = best / std::max(std::abs(sol.epsilon_squared), 1.0);
                    emit(rel < 1e-4, "fd",
                         "n=" + std::to_string(sol.level) + " eps^2 " +
                             fmt(sol.epsilon_squared) + " vs grid spectrum (delta " + fmt(best) +
                             ")");
                } catch (const std::exception& e) {
                    emit(false, "fd", std::string("n=") + std::to_string(sol.level) + " " +
                                          e.what());
                }
            }
        } else if (check == "norm") {
            for (const auto& sol : sols) {
                try {
                    double nq = models::normalization_constant(sol, models::NormMethod::Quadrature);
                    double nc = models::normalization_constant(sol, models::NormMethod::ClosedForm);
                    double rel = std::abs(nq - nc) / nq;
                    emit(rel < 1e-8 && nq > 0, "norm",
                         "n=" + std::to_string(sol.level) + " |phi| = " + fmt(nq) +
                             " (closed vs quadrature rel diff " + fmt(rel) + ")");
                } catch (const std::exception& e) {
                    emit(false, "norm",
                         std::string("n=") + std::to_string(sol.level) + " " + e.what());
                }
            }
        } else if (check == "degeneration") {
            try {
                auto levels = cfg.degeneration_levels;
                if (levels.empty()) levels = {0};
                auto rep = models::degeneration_check(cfg.model(), cfg.case_tag,
                                                      cfg.degeneration_scales, levels);
                bool monotone = true;
                for (std::size_t i = 1; i < rep.steps.size(); ++i)
                    if (rep.steps[i].scale < rep.steps[i - 1].scale &&
                        rep.steps[i].spectrum_distance > rep.steps[i - 1].spectrum_distance)
                        monotone = false;
                std::string detail = "endpoint distance " + fmt(rep.endpoint_distance) +
                                     ", shift +" + std::to_string(rep.index_shift) + ", path";
                for (const auto& s : rep.steps)
                    detail += " (" + fmt(s.scale) + " -> " + fmt(s.spectrum_distance) + ")";
                emit(monotone && rep.endpoint_distance < 1e-10, "degeneration", detail);
            } catch (const std::exception& e) {
                emit(false, "degeneration", e.what());
            }
        } else {
            emit(false, "config", "unknown verify check: " + check);
        }
    }
    return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------

int cmd_sweep(const std::string& config_path, const CliOptions& opts) {
    JobConfig cfg;
    try {
        cfg = load(config_path, opts);
        if (!cfg.free_coefficient || !cfg.window)
            throw ConfigError("sweep needs a free coefficient and a window");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    const auto [lo, hi] = *cfg.window;
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        std::cerr << "config error: empty or unbounded sweep window\n";
        return 2;
    }
    const int samples = std::max(cfg.samples, 2);

    struct Row {
        double value;
        std::vector<double> e2;       // per level (NaN when unsolvable)
        std::vector<double> residual; // worst family residual per level
    };

    auto eval_sample = [&](double c) {
        Row row;
        row.value = c;
        for (int n : cfg.levels) {
            JobConfig point = cfg;
            point.coefficients[*cfg.free_coefficient] = c;
            try {
                auto sols = models::solve_level(point.model(), cfg.case_tag, n);
                double best = std::numeric_limits<double>::infinity();
                double e2 = std::numeric_limits<double>::quiet_NaN();
                for (const auto& s : sols) {
                    double w = worst_family_residual(s);
                    if (w < best) {
                        best = w;
                        e2 = s.energy_squared;
                    }
                }
                row.e2.push_back(e2);
                row.residual.push_back(best);
            } catch (const std::exception&) {
                row.e2.push_back(std::numeric_limits<double>::quiet_NaN());
                row.residual.push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }
        return row;
    };

    // jobs within a sweep may run concurrently; assembly stays ordered
    std::vector<Row> rows(samples);
    const int jobs = std::max(1, opts.jobs);
    std::vector<std::future<void>> futures;
    std::atomic<int> next{0};
    for (int t = 0; t < jobs; ++t)
        futures.push_back(std::async(std::launch::async, [&]() {
            for (int i = next.fetch_add(1); i < samples; i = next.fetch_add(1))
                rows[i] = eval_sample(lo + (hi - lo) * i / (samples - 1));
        }));
    for (auto& f : futures) f.get();

    std::ostringstream csv;
    csv << cfg.free_coefficient.value();
    for (int n : cfg.levels) csv << ",E_squared_n" << n << ",residual_n" << n;
    csv << "\n";
    for (const auto& row : rows) {
        csv << fmt(row.value);
        for (std::size_t j = 0; j < row.e2.size(); ++j) {
            csv << "," << (std::isnan(row.e2[j]) ? "NA" : fmt(row.e2[j])) << ","
                << (std::isnan(row.residual[j]) ? "NA" : fmt(row.residual[j]));
        }
        csv << "\n";
    }
    write_atomic(fs::path(cfg.out_dir) / "calibration.csv", csv.str());

    // locate calibrated points for the report
    std::ostringstream report;
    report << "sweep of '" << *cfg.free_coefficient << "' over [" << fmt(lo) << ", " << fmt(hi)
           << "], " << samples << " samples\n";
    bool any = false;
    for (int n : cfg.levels) {
        try {
            auto cal = models::calibrate(cfg.model(), *cfg.free_coefficient, cfg.case_tag, n, lo,
                                         hi, samples);
            for (const auto& c : cal) {
                models::PotentialModel m = c.model;
                double v = 0;
                switch (*cfg.free_coefficient) {
                    case 'a': v = m.a; break;
                    case 'b': v = m.b; break;
                    case 'd': v = m.d; break;
                    case 'e': v = m.e; break;
                    case 'f': v = m.f; break;
                    case 'g': v = m.g; break;
                    case 'h': v = m.h; break;
                }
                report << "level " << n << ": calibrated at " << *cfg.free_coefficient << " = "
                       << fmt(v) << " (E^2 = " << fmt(c.solution.energy_squared) << ")\n";
                any = true;
            }
        } catch (const std::exception&) {
        }
    }
    if (!any) report << "no calibrated point\n";
    write_atomic(fs::path(cfg.out_dir) / "report.txt", report.str());

    if (opts.plot_data) {
        // long-format table for external plotting tools
        std::ostringstream longcsv;
        longcsv << "value,level,quantity,amount\n";
        for (const auto& row : rows)
            for (std::size_t j = 0; j < row.e2.size(); ++j) {
                if (!std::isnan(row.e2[j]))
                    longcsv << fmt(row.value) << "," << cfg.levels[j] << ",E_squared,"
                            << fmt(row.e2[j]) << "\n";
                if (!std::isnan(row.residual[j]))
                    longcsv << fmt(row.value) << "," << cfg.levels[j] << ",residual,"
                            << fmt(row.residual[j]) << "\n";
            }
        write_atomic(fs::path(cfg.out_dir) / "calibration_long.csv", longcsv.str());
    }
    log_info("wrote " + (fs::path(cfg.out_dir) / "calibration.csv").string());
    return 0;
}

} // namespace qes::cli
