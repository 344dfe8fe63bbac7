#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include "kolmo/core/fourier.hpp"
#include "kolmo/core/snapshot.hpp"
#include "kolmo/inequality/interpolation.hpp"
#include "kolmo/inequality/spectral.hpp"
#include "kolmo/lab/config.hpp"
#include "kolmo/lab/report.hpp"
#include "kolmo/propagator/trajectory.hpp"
#include "kolmo/telescope/telescope.hpp"

#ifndef KOLMO_VERSION
#define KOLMO_VERSION "unknown"
#endif

namespace kolmo::lab {

enum ExitCode : int { exit_ok = 0, exit_internal = 1, exit_config = 2, exit_guard = 3, exit_violation = 4 };

/// Run state: output directory plus everything the manifest reports.
class Run {
public:
    explicit Run(const ExperimentConfig& cfg) : cfg_(cfg), out_(cfg.output_dir) {}

    const ExperimentConfig& config() const { return cfg_; }
    std::filesystem::path path(const std::string& name) {
        std::filesystem::create_directories(out_);
        outputs_.push_back(name);
        return out_ / name;
    }
    void op(const std::string& name) {
        if (std::find(operations_.begin(), operations_.end(), name) == operations_.end()) operations_.push_back(name);
    }
    json& constants() { return constants_; }
    json& witness() { return witness_; }

    void write_manifest(int code, const std::string& message) {
        std::filesystem::create_directories(out_);
        char stamp[32];
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        json m{{"tool", "kolmo_lab"},
               {"version", KOLMO_VERSION},
               {"kind", kind_name(cfg_.kind)},
               {"config", resolved_json(cfg_)},
               {"operations", operations_},
               {"constants", constants_},
               {"outputs", outputs_},
               {"exit_code", code},
               {"message", message},
               {"timestamp", stamp}};
        if (!witness_.is_null()) m["witness"] = witness_;
        std::ofstream(out_ / "manifest.json") << m.dump(2) << '\n';
    }

private:
    ExperimentConfig cfg_;
    std::filesystem::path out_;
    std::vector<std::string> operations_, outputs_;
    json constants_ = json::object();
    json witness_;
};

namespace detail {

inline std::vector<GaussianMixtureState> initial_states(const ExperimentConfig& cfg) {
    const auto& s = *cfg.initial;
    std::vector<GaussianMixtureState> out;
    if (s.source == InitialSpec::Source::random) {
        Rng rng(substream_seed(cfg.seed, 1));
        for (int k = 0; k < s.count; ++k) out.push_back(random_mixture(s.d, s.random, rng));
    } else {
        for (const auto& m : s.mixtures) {
            if (!m.is_array() || m.empty()) throw ConfigError("initial.mixtures: each entry is a non-empty term list");
            std::vector<GaussianTerm> terms;
            for (const auto& t : m) terms.push_back(term_from_json(t, s.d));
            try {
                out.emplace_back(s.d, std::move(terms));
            } catch (const InvalidArgument& e) {
                throw ConfigError(std::string("initial.mixtures: ") + e.what());
            }
        }
    }
    return out;
}

inline DecayConstants decay_constants(const ExperimentConfig& cfg, int d) {
    auto k = cfg.constants.c_exponent ? DecayConstants::with_exponent(d, *cfg.constants.c_exponent)
                                      : DecayConstants::defaults(d);
    if (cfg.constants.C3) k.C3 = *cfg.constants.C3;
    try {
        k.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("constants: ") + e.what());
    }
    return k;
}

inline PhaseGrid make_grid(const GridSpec& g) { return PhaseGrid(g.d, g.points, g.half_width); }

inline SpectralFitOptions fit_options(const ExperimentConfig& cfg) {
    SpectralFitOptions o;
    if (!cfg.time.N.empty()) o.N_list = cfg.time.N;
    o.random_samples = cfg.options.random_samples;
    o.adversarial_samples = cfg.options.adversarial_samples;
    o.power_iterations = cfg.options.power_iterations;
    o.seed = substream_seed(cfg.seed, 2);
    return o;
}

// Norm-form spectral constant: given in the config, or fitted on the configured grid.
inline double spectral_constant(Run& run) {
    const auto& cfg = run.config();
    if (cfg.constants.C1_norm) {
        run.constants()["C1_norm"] = *cfg.constants.C1_norm;
        run.constants()["C1_source"] = "config";
        return *cfg.constants.C1_norm;
    }
    run.op("fit_spectral_constant");
    const auto fit = fit_spectral_constant(*cfg.omega, make_grid(*cfg.grid), fit_options(cfg));
    run.constants()["fitted_C"] = fit.fitted_C;
    run.constants()["C1_norm"] = fit.C1_norm;
    run.constants()["C1_source"] = "fitted";
    if (!fit.warning.empty()) run.constants()["spectral_warning"] = fit.warning;
    return fit.C1_norm;
}

inline std::string b(bool v) { return v ? "1" : "0"; }

// ---- experiments ----------------------------------------------------------------------------

inline int run_propagate(Run& run) {
    const auto& cfg = run.config();
    const auto g = make_grid(*cfg.grid);
    std::vector<PhaseField> fields;
    std::vector<std::optional<GaussianMixtureState>> exact;
    if (cfg.initial->source == InitialSpec::Source::snapshot) {
        run.op("read_snapshot");
        const auto snap = read_snapshot(cfg.initial->snapshot);
        if (const auto* f = std::get_if<PhaseField>(&snap)) {
            fields.push_back(*f);
        } else if (const auto* F = std::get_if<SpectralField>(&snap)) {
            run.op("fourier_inverse");
            fields.push_back(fourier_inverse(*F));
        } else {
            throw ConfigError("initial.snapshot: a mask snapshot is not a field");
        }
        exact.emplace_back();
    } else {
        run.op("sample_mixture_physical");
        for (const auto& s : initial_states(cfg)) {
            fields.push_back(sample_mixture_physical(g, s));
            exact.emplace_back(s);
        }
    }
    run.op("propagate_trajectory");
    CsvWriter csv(run.path("propagate.csv"),
                  {"dataset", "time", "l2_norm", "zero_frequency_re", "zero_frequency_im", "input_boundary_fraction",
                   "output_boundary_fraction", "aliasing_fraction", "mixture_rel_l2"});
    std::vector<Series> plot;
    int violations = 0;
    for (std::size_t k = 0; k < fields.size(); ++k) {
        char dir[32];
        std::snprintf(dir, sizeof dir, "trajectory_%02zu", k);
        const auto tr = write_trajectory(run.path(dir), fields[k], cfg.time.times);
        Series s{"dataset " + std::to_string(k), {}, {}};
        for (std::size_t i = 0; i < tr.frames.size(); ++i) {
            const auto& f = tr.frames[i];
            std::string rel;
            if (exact[k]) {
                run.op("propagate_mixture");
                const auto ref = sample_mixture_physical(g, propagate_mixture(*exact[k], f.time));
                double num = 0.0, den = 0.0;
                for (std::size_t j = 0; j < ref.values().size(); ++j) {
                    num += std::norm(tr.fields[i].values()[j] - ref.values()[j]);
                    den += std::norm(ref.values()[j]);
                }
                rel = fmt(std::sqrt(num / den));
            }
            if (i > 0 && f.norm > tr.frames[i - 1].norm * (1.0 + 1e-12)) {
                ++violations;
                run.witness() = {{"dataset", k}, {"time", f.time}, {"norm", f.norm}, {"previous_norm", tr.frames[i - 1].norm}};
            }
            csv.row({std::to_string(k), fmt(f.time), fmt(f.norm), fmt(f.zero_frequency.real()), fmt(f.zero_frequency.imag()),
                     fmt(f.input_boundary_fraction), fmt(f.output_boundary_fraction), fmt(f.aliasing_fraction), rel});
            s.x.push_back(f.time);
            s.y.push_back(f.norm);
        }
        plot.push_back(std::move(s));
    }
    if (cfg.plots) write_svg_plot(run.path("propagate_norm.svg"), "L2 norm along the trajectory", "t", "||g(t)||", plot);
    run.constants()["contraction_violations"] = violations;
    return violations ? exit_violation : exit_ok;
}

inline int run_decay_check(Run& run) {
    const auto& cfg = run.config();
    const auto states = initial_states(cfg);
    const int d = cfg.initial->d;
    const auto k = decay_constants(cfg, d);
    run.constants()["c_exponent"] = k.c_exponent;
    run.constants()["c_pointwise"] = k.c_pointwise;
    run.constants()["C2"] = k.C2;
    run.constants()["C3"] = k.C3;
    run.op("propagate_mixture");
    run.op("tail_mass");
    run.op("decay_bound");
    CsvWriter csv(run.path("decay.csv"), {"dataset", "T", "N", "tail_mass", "bound", "ratio", "violation"});
    int violations = 0;
    std::vector<Series> plot;
    for (std::size_t j = 0; j < states.size(); ++j) {
        const double mass0 = mixture_norm_sq(states[j]);
        for (double T : cfg.time.T_list) {
            const auto tails = tail_mass_profile(propagate_mixture(states[j], T), cfg.time.N);
            Series s{"set " + std::to_string(j) + ", T=" + fmt(T), {}, {}};
            for (std::size_t i = 0; i < tails.size(); ++i) {
                const double N = cfg.time.N[i];
                const double bound = decay_bound(N, T, mass0, k);
                const bool bad = tails[i] > bound + 1e-9 * mass0;
                if (bad && !violations)
                    run.witness() = {{"dataset", j}, {"T", T}, {"N", N}, {"tail_mass", tails[i]}, {"bound", bound}};
                violations += bad;
                csv.row({std::to_string(j), fmt(T), fmt(N), fmt(tails[i]), fmt(bound), fmt(tails[i] / bound), b(bad)});
                s.x.push_back(N);
                s.y.push_back(std::log10(std::max(tails[i] / mass0, 1e-300)));
            }
            if (j == 0) plot.push_back(std::move(s));
        }
    }
    // Pointwise exponent bound on random (t, zeta).
    run.op("symbol");
    Rng rng(substream_seed(cfg.seed, 3));
    std::size_t pointwise_bad = 0;
    double worst = std::numeric_limits<double>::infinity();
    std::vector<double> z(static_cast<std::size_t>(2 * d));
    for (std::size_t i = 0; i < cfg.options.pointwise_samples; ++i) {
        const double t = 10.0 * (1.0 - uniform(rng, 0.0, 1.0));
        double r2 = 0.0;
        for (auto& c : z) {
            c = uniform(rng, -1e3, 1e3) / std::sqrt(2.0 * d);
            r2 += c * c;
        }
        if (r2 == 0.0) continue;
        const double Q = symbol_exponent(t, z);
        const double floor = r2 * min_t_t3(t) * k.c_pointwise;
        worst = std::min(worst, Q / floor);
        pointwise_bad += Q < floor * (1.0 - 1e-12);
    }
    CsvWriter pw(run.path("pointwise.csv"), {"samples", "violations", "min_ratio"});
    pw.row({std::to_string(cfg.options.pointwise_samples), std::to_string(pointwise_bad), fmt(worst)});
    if (cfg.plots)
        write_svg_plot(run.path("decay_tail.svg"), "Spectral tail mass (first data set)", "N", "log10 tail / initial mass",
                       plot);
    run.constants()["tail_violations"] = violations;
    run.constants()["pointwise_violations"] = pointwise_bad;
    return violations || pointwise_bad ? exit_violation : exit_ok;
}

inline int run_thickness(Run& run) {
    const auto& cfg = run.config();
    const auto& o = cfg.options;
    const auto& omega = *cfg.omega;
    run.op("minimal_delta");
    double md = std::numeric_limits<double>::infinity();
    try {
        md = minimal_delta(omega, o.r, o.sampling_step);
    } catch (const NotThick&) {
    }
    const double delta = o.delta ? *o.delta : (std::isfinite(md) ? md + 2.0 * o.sampling_step : 1.0);
    run.op("check_thickness");
    const auto v = check_thickness(omega, delta, o.r, o.sampling_step);
    std::string witness;
    if (v.counterexample) {
        for (std::size_t i = 0; i < v.counterexample->y.size(); ++i)
            witness += (i ? " " : "") + fmt(v.counterexample->y[i]);
        run.witness() = {{"y", v.counterexample->y}, {"distance", v.counterexample->distance}};
    }
    CsvWriter csv(run.path("thickness.csv"), {"kind", "r", "sampling_step", "minimal_delta", "delta", "thick",
                                               "worst_distance", "samples", "counterexample"});
    csv.row({to_json(omega)["kind"].get<std::string>(), fmt(o.r), fmt(o.sampling_step), fmt(md), fmt(delta), b(v.thick),
             fmt(v.worst_distance), std::to_string(v.samples), witness});
    if (cfg.grid) {
        run.op("grid_mask");
        try {
            write_snapshot(run.path("mask.ksnp"), grid_mask(omega, make_grid(*cfg.grid)));
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("grid: ") + e.what());
        }
    }
    run.constants()["minimal_delta"] = md;
    run.constants()["thick"] = v.thick;
    return exit_ok;
}

inline int run_spectral_fit(Run& run) {
    const auto& cfg = run.config();
    run.op("fit_spectral_constant");
    run.op("spectral_ratio");
    const auto fit = fit_spectral_constant(*cfg.omega, make_grid(*cfg.grid), fit_options(cfg));
    CsvWriter csv(run.path("spectral.csv"), {"N", "ratio", "ratio_random", "ratio_adversarial", "fitted_C"});
    Series s{"ln ratio", {}, {}};
    for (const auto& r : fit.rows) {
        csv.row({fmt(r.N), fmt(r.worst_ratio), fmt(r.worst_random), fmt(r.worst_adversarial), fmt(r.fitted_C)});
        s.x.push_back(r.N);
        s.y.push_back(std::log(r.worst_ratio));
    }
    if (cfg.plots) write_svg_plot(run.path("spectral_ratio.svg"), "Worst spectral ratio", "N", "ln ratio", {s});
    run.constants()["fitted_C"] = fit.fitted_C;
    run.constants()["C1_norm"] = fit.C1_norm;
    run.constants()["family"] = fit.family;
    if (!fit.warning.empty()) run.constants()["spectral_warning"] = fit.warning;
    return exit_ok;
}

inline int run_interp_verify(Run& run) {
    const auto& cfg = run.config();
    const auto states = initial_states(cfg);
    const auto k = decay_constants(cfg, cfg.initial->d);
    const double C1 = spectral_constant(run);
    run.constants()["C2"] = k.C2;
    run.constants()["C3"] = k.C3;
    run.constants()["envelope_constant"] = (C1 + k.C2 + k.C3) * (C1 + k.C2 + k.C3) / k.C2;
    run.op("verify_interpolation");
    run.op("assemble_interpolation_bound");
    InterpolationOptions opt;
    opt.constants = k;
    opt.sample_step = cfg.options.sample_step;
    CsvWriter csv(run.path("interp.csv"), {"dataset", "T", "alpha", "lhs", "restricted", "norm_g0", "rhs", "log_rhs",
                                            "observed_constant", "envelope_constant", "log_chain_bound", "violation"});
    int violations = 0;
    Series s{"observed C", {}, {}, false};
    for (std::size_t j = 0; j < states.size(); ++j)
        for (double T : cfg.time.T_list)
            for (double a : cfg.time.alpha) {
                const auto r = verify_interpolation(states[j], *cfg.omega, T, a, C1, opt);
                const bool bad = std::log(r.lhs) > r.log_rhs || r.observed_constant > r.envelope_constant ||
                                 std::log(r.lhs) > r.chain.log_bound;
                if (bad && !violations)
                    run.witness() = {{"dataset", j}, {"T", T}, {"alpha", a}, {"lhs", r.lhs},
                                     {"log_rhs", r.log_rhs}, {"observed_constant", r.observed_constant}};
                violations += bad;
                csv.row({std::to_string(j), fmt(T), fmt(a), fmt(r.lhs), fmt(r.restricted), fmt(r.norm_g0), fmt(r.rhs()),
                         fmt(r.log_rhs), fmt(r.observed_constant), fmt(r.envelope_constant), fmt(r.chain.log_bound),
                         b(bad)});
                s.x.push_back((1.0 + 1.0 / (T * T * T)) / a);
                s.y.push_back(r.observed_constant);
            }
    if (cfg.plots)
        write_svg_plot(run.path("interp_observed.svg"), "Observed interpolation constant", "(1/alpha)(1 + 1/T^3)",
                       "observed C", {s});
    run.constants()["violations"] = violations;
    return violations ? exit_violation : exit_ok;
}

inline int run_telescope(Run& run) {
    const auto& cfg = run.config();
    std::optional<TimeSet> E;
    try {
        E.emplace(cfg.time.T, cfg.time.E);
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("time.E: ") + e.what());
    }
    const auto states = initial_states(cfg);
    const auto k = decay_constants(cfg, cfg.initial->d);
    const double C1_norm = spectral_constant(run);
    const double C1 = telescope_C1(C1_norm, k);
    run.op("find_density_point");
    const double l = find_density_point(*E);
    double l1 = 0.0;
    if (cfg.time.l1) {
        l1 = *cfg.time.l1;
    } else {
        run.op("choose_l1");
        l1 = choose_l1(*E, l, cfg.time.lambda);
    }
    run.op("build_sequence");
    const auto seq = build_sequence(*E, l, cfg.time.lambda, l1, 40);
    run.op("assemble_constants");
    const auto c = assemble_constants(seq, C1);
    auto& K = run.constants();
    K["C1_telescope"] = C1;
    K["l"] = l;
    K["l1"] = l1;
    K["lambda"] = seq.lambda;
    K["m0"] = seq.m0;
    K["beta"] = c.beta;
    K["C2_telescope"] = c.C2;
    K["log_C_obs"] = c.log_C_obs;

    run.op("verify_observability");
    ObservabilityOptions opt;
    opt.max_panel = cfg.options.max_panel;
    opt.sample_step = cfg.options.sample_step;
    CsvWriter steps(run.path("telescope.csv"), {"dataset", "m", "l_m", "measure", "log_lhs", "log_rhs", "holds"});
    CsvWriter summary(run.path("telescope_summary.csv"),
                      {"dataset", "beta", "C2", "log_C_obs", "lhs", "log_rhs", "log_ratio", "ratio", "depth",
                       "telescoping_remainder", "identity_error", "step_violations", "auxiliary_violations",
                       "monotonicity_violations", "sum_bound_holds"});
    int violations = 0;
    std::vector<Series> plot;
    for (std::size_t j = 0; j < states.size(); ++j) {
        const auto r = verify_observability(states[j], *cfg.omega, *E, seq, c, opt);
        Series s{"set " + std::to_string(j) + " log rhs", {}, {}};
        for (const auto& st : r.steps) {
            steps.row({std::to_string(j), std::to_string(st.m), fmt(st.l_m), fmt(st.measure), fmt(st.log_lhs),
                       fmt(st.log_rhs), b(st.holds)});
            s.x.push_back(st.m);
            s.y.push_back(st.log_rhs);
        }
        plot.push_back(std::move(s));
        summary.row({std::to_string(j), fmt(c.beta), fmt(c.C2), fmt(c.log_C_obs), fmt(r.lhs), fmt(r.log_rhs),
                     fmt(r.log_ratio), fmt(r.ratio()), std::to_string(r.depth), fmt(r.telescoping_remainder),
                     fmt(r.telescoping_identity_error), std::to_string(r.step_violations),
                     std::to_string(r.auxiliary_violations), std::to_string(r.monotonicity_violations),
                     b(r.sum_bound_holds)});
        const bool bad = r.log_ratio > 0.0 || r.step_violations || r.auxiliary_violations ||
                         r.monotonicity_violations || !r.sum_bound_holds;
        if (bad && !violations)
            run.witness() = {{"dataset", j}, {"log_ratio", r.log_ratio}, {"step_violations", r.step_violations},
                             {"auxiliary_violations", r.auxiliary_violations}};
        violations += bad;
    }
    if (cfg.plots)
        write_svg_plot(run.path("telescope_steps.svg"), "Per-step right-hand side", "m", "log rhs_m", plot);
    K["violations"] = violations;
    return violations ? exit_violation : exit_ok;
}

} // namespace detail

/// Runs one experiment, writes its artifacts and manifest, and returns the process exit code.
inline int run(const ExperimentConfig& cfg, std::ostream& log = std::cerr) {
    Run r(cfg);
    int code = exit_ok;
    std::string message = "ok";
    try {
        switch (cfg.kind) {
        case ExperimentKind::propagate: code = detail::run_propagate(r); break;
        case ExperimentKind::decay_check: code = detail::run_decay_check(r); break;
        case ExperimentKind::thickness: code = detail::run_thickness(r); break;
        case ExperimentKind::spectral_fit: code = detail::run_spectral_fit(r); break;
        case ExperimentKind::interp_verify: code = detail::run_interp_verify(r); break;
        case ExperimentKind::telescope: code = detail::run_telescope(r); break;
        }
        if (code == exit_violation) message = "inequality violation detected";
    } catch (const SequenceError& e) {
        code = exit_config;
        message = e.what();
        r.witness() = {{"failing_m", e.failing_m}};
    } catch (const GuardError& e) {
        code = exit_guard;
        message = e.what();
    } catch (const ZeroRestrictedNorm& e) {
        code = exit_guard;
        message = e.what();
    } catch (const Error& e) {
        // Config, argument, data and unsupported-variant errors all trace back to the input.
        code = exit_config;
        message = e.what();
    }
    if (code != exit_ok) log << "kolmo_lab " << kind_name(cfg.kind) << ": " << message << '\n';
    r.write_manifest(code, message);
    return code;
}

} // namespace kolmo::lab
