#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kolmo/core/random.hpp"
#include "kolmo/thickness/descriptor.hpp"

namespace kolmo::lab {

using nlohmann::json;

enum class ExperimentKind { propagate, decay_check, thickness, spectral_fit, interp_verify, telescope };

inline const char* kind_name(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::propagate: return "propagate";
    case ExperimentKind::decay_check: return "decay-check";
    case ExperimentKind::thickness: return "thickness";
    case ExperimentKind::spectral_fit: return "spectral-fit";
    case ExperimentKind::interp_verify: return "interp-verify";
    case ExperimentKind::telescope: return "telescope";
    }
    return "?";
}

inline ExperimentKind parse_kind(const std::string& s) {
    for (auto k : {ExperimentKind::propagate, ExperimentKind::decay_check, ExperimentKind::thickness,
                   ExperimentKind::spectral_fit, ExperimentKind::interp_verify, ExperimentKind::telescope})
        if (s == kind_name(k)) return k;
    throw ConfigError("unknown experiment kind '" + s + "'");
}

struct GridSpec {
    int d = 1;
    std::size_t points = 128;
    double half_width = 16.0;
};

struct InitialSpec {
    enum class Source { random, mixtures, snapshot };
    Source source = Source::random;
    int d = 1;
    int count = 1;               // random: number of data sets
    RandomMixtureSpec random;
    std::vector<json> mixtures;  // explicit: one term list per data set
    std::string snapshot;
};

struct TimeSpec {
    double T = 1.0;
    std::vector<double> times;
    std::vector<double> T_list;
    std::vector<double> alpha;
    std::vector<double> N;
    std::vector<std::pair<double, double>> E;
    bool has_E = false;
    double lambda = 0.95;
    std::optional<double> l1;
};

struct ConstantsSpec {
    std::optional<double> c_exponent;
    std::optional<double> C3;
    std::optional<double> C1_norm;
};

struct OptionsSpec {
    int random_samples = 16;
    int adversarial_samples = 2;
    int power_iterations = 60;
    double r = 0.25;
    double sampling_step = 1e-3;
    std::optional<double> delta;
    std::size_t pointwise_samples = 100000;
    double sample_step = 0.02;
    double max_panel = 0.05;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::propagate;
    std::uint64_t seed = 1;
    std::string output_dir = "kolmo_out";
    bool plots = false;
    std::optional<GridSpec> grid;
    std::optional<InitialSpec> initial;
    std::optional<ThickSetDescriptor> omega;
    TimeSpec time;
    ConstantsSpec constants;
    OptionsSpec options;
};

namespace detail {

// Object reader that rejects keys it was not asked about.
class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
    }
    ~Reader() noexcept(false) {
        if (std::uncaught_exceptions()) return;
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
    }

    bool has(const std::string& k) {
        seen_.insert(k);
        return j_.contains(k);
    }

    template <class T> T get(const std::string& k) {
        if (!has(k)) throw ConfigError(where_ + ": missing key '" + k + "'");
        try {
            return j_.at(k).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where_ + ": bad value for '" + k + "': " + e.what());
        }
    }

    template <class T> void maybe(const std::string& k, T& out) {
        if (has(k)) out = get<T>(k);
    }

    template <class T> void maybe(const std::string& k, std::optional<T>& out) {
        if (has(k)) out = get<T>(k);
    }

    const json& raw(const std::string& k) {
        if (!has(k)) throw ConfigError(where_ + ": missing key '" + k + "'");
        return j_.at(k);
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

inline InitialSpec parse_initial(const json& j) {
    Reader r(j, "initial");
    InitialSpec s;
    r.maybe("d", s.d);
    int sources = 0;
    if (r.has("random")) {
        ++sources;
        s.source = InitialSpec::Source::random;
        Reader q(r.raw("random"), "initial.random");
        q.maybe("count", s.count);
        q.maybe("terms", s.random.terms);
        q.maybe("min_eigenvalue", s.random.min_eigenvalue);
        q.maybe("max_eigenvalue", s.random.max_eigenvalue);
        q.maybe("center_radius", s.random.center_radius);
        q.maybe("phase_radius", s.random.phase_radius);
        if (s.count < 1 || s.random.terms < 1) throw ConfigError("initial.random: count and terms must be >= 1");
        if (!(s.random.min_eigenvalue > 0.0 && s.random.min_eigenvalue <= s.random.max_eigenvalue))
            throw ConfigError("initial.random: need 0 < min_eigenvalue <= max_eigenvalue");
    }
    if (r.has("mixtures")) {
        ++sources;
        s.source = InitialSpec::Source::mixtures;
        const auto& m = r.raw("mixtures");
        if (!m.is_array() || m.empty()) throw ConfigError("initial.mixtures: expected a non-empty array");
        for (const auto& x : m) s.mixtures.push_back(x);
        s.count = static_cast<int>(s.mixtures.size());
    }
    if (r.has("snapshot")) {
        ++sources;
        s.source = InitialSpec::Source::snapshot;
        s.snapshot = r.get<std::string>("snapshot");
    }
    if (sources != 1) throw ConfigError("initial: give exactly one of 'random', 'mixtures', 'snapshot'");
    if (s.d < 1) throw ConfigError("initial: d must be >= 1");
    return s;
}

inline void require_positive(const std::vector<double>& v, const char* what, bool allow_zero = false) {
    for (double x : v)
        if (!(allow_zero ? x >= 0.0 : x > 0.0) || !std::isfinite(x))
            throw ConfigError(std::string("time.") + what + ": values must be " + (allow_zero ? "non-negative" : "positive"));
}

} // namespace detail

inline GaussianTerm term_from_json(const json& j, int d) {
    detail::Reader r(j, "mixture term");
    const int n = 2 * d;
    GaussianTerm t;
    auto vec = [&](const char* k, RVec& out) {
        const auto v = r.get<std::vector<double>>(k);
        if (static_cast<int>(v.size()) != n) throw ConfigError(std::string("mixture term: '") + k + "' needs 2d entries");
        out = Eigen::Map<const RVec>(v.data(), n);
    };
    auto mat = [&](const char* k, RMat& out) {
        const auto v = r.get<std::vector<std::vector<double>>>(k);
        if (static_cast<int>(v.size()) != n) throw ConfigError(std::string("mixture term: '") + k + "' must be 2d x 2d");
        out.resize(n, n);
        for (int a = 0; a < n; ++a) {
            if (static_cast<int>(v[a].size()) != n) throw ConfigError(std::string("mixture term: '") + k + "' must be 2d x 2d");
            for (int b = 0; b < n; ++b) out(a, b) = v[a][b];
        }
    };
    const auto amp = r.get<std::vector<double>>("amplitude");
    if (amp.size() != 2) throw ConfigError("mixture term: 'amplitude' is [re, im]");
    t.amplitude = {amp[0], amp[1]};
    vec("center", t.center);
    vec("phase", t.phase);
    RMat re, im = RMat::Zero(n, n);
    mat("quadratic", re);
    if (r.has("quadratic_imag")) mat("quadratic_imag", im);
    t.quadratic = re.cast<cdouble>() + cdouble(0.0, 1.0) * im.cast<cdouble>();
    return t;
}

inline json term_to_json(const GaussianTerm& t) {
    const auto n = t.center.size();
    std::vector<std::vector<double>> re(n, std::vector<double>(n)), im(n, std::vector<double>(n));
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            re[a][b] = t.quadratic(a, b).real();
            im[a][b] = t.quadratic(a, b).imag();
        }
    return {{"amplitude", {t.amplitude.real(), t.amplitude.imag()}},
            {"center", std::vector<double>(t.center.data(), t.center.data() + n)},
            {"phase", std::vector<double>(t.phase.data(), t.phase.data() + n)},
            {"quadratic", re},
            {"quadratic_imag", im}};
}

inline ExperimentConfig parse_config(const json& j) {
    detail::Reader r(j, "config");
    ExperimentConfig c;
    c.kind = parse_kind(r.get<std::string>("kind"));
    r.maybe("seed", c.seed);
    r.maybe("output_dir", c.output_dir);
    r.maybe("plots", c.plots);
    if (r.has("grid")) {
        detail::Reader g(r.raw("grid"), "grid");
        GridSpec s;
        g.maybe("d", s.d);
        g.maybe("points", s.points);
        g.maybe("half_width", s.half_width);
        if (s.d < 1 || s.d > 2 || s.points < 4 || s.points % 2 || !(s.half_width > 0.0))
            throw ConfigError("grid: need d in {1,2}, even points >= 4 and half_width > 0");
        c.grid = s;
    }
    if (r.has("initial")) c.initial = detail::parse_initial(r.raw("initial"));
    if (r.has("omega")) c.omega = set_from_json(r.raw("omega"));
    if (r.has("time")) {
        detail::Reader t(r.raw("time"), "time");
        auto& s = c.time;
        t.maybe("T", s.T);
        t.maybe("times", s.times);
        t.maybe("T_list", s.T_list);
        t.maybe("alpha", s.alpha);
        t.maybe("N", s.N);
        t.maybe("lambda", s.lambda);
        t.maybe("l1", s.l1);
        if (t.has("E")) {
            s.has_E = true;
            const auto& e = t.raw("E");
            if (!e.is_array()) throw ConfigError("time.E: expected an array of [a, b] intervals");
            for (const auto& iv : e) {
                if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number())
                    throw ConfigError("time.E: each interval is [a, b]");
                s.E.emplace_back(iv[0].get<double>(), iv[1].get<double>());
            }
        }
        if (!(s.T > 0.0)) throw ConfigError("time.T must be positive");
        detail::require_positive(s.times, "times", true);
        detail::require_positive(s.T_list, "T_list");
        detail::require_positive(s.N, "N", true);
        for (double a : s.alpha)
            if (!(a > 0.0 && a < 1.0)) throw ConfigError("time.alpha: values must lie in (0, 1)");
    }
    if (r.has("constants")) {
        detail::Reader k(r.raw("constants"), "constants");
        k.maybe("c_exponent", c.constants.c_exponent);
        k.maybe("C3", c.constants.C3);
        k.maybe("C1_norm", c.constants.C1_norm);
    }
    if (r.has("options")) {
        detail::Reader o(r.raw("options"), "options");
        auto& s = c.options;
        o.maybe("random_samples", s.random_samples);
        o.maybe("adversarial_samples", s.adversarial_samples);
        o.maybe("power_iterations", s.power_iterations);
        o.maybe("r", s.r);
        o.maybe("sampling_step", s.sampling_step);
        o.maybe("delta", s.delta);
        o.maybe("pointwise_samples", s.pointwise_samples);
        o.maybe("sample_step", s.sample_step);
        o.maybe("max_panel", s.max_panel);
        if (s.random_samples < 0 || s.adversarial_samples < 0 || s.power_iterations < 1)
            throw ConfigError("options: sample counts must be >= 0 and power_iterations >= 1");
        if (!(s.r > 0.0) || !(s.sampling_step > 0.0) || !(s.sample_step > 0.0) || !(s.max_panel > 0.0))
            throw ConfigError("options: r, sampling_step, sample_step and max_panel must be positive");
    }

    // Per-kind requirements.
    auto need = [&](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string(kind_name(c.kind)) + ": " + what);
    };
    const bool mixture_data = c.initial && c.initial->source != InitialSpec::Source::snapshot;
    switch (c.kind) {
    case ExperimentKind::propagate:
        need(c.grid.has_value(), "requires 'grid'");
        need(c.initial.has_value(), "requires 'initial'");
        need(!c.time.times.empty(), "requires 'time.times'");
        if (c.initial->source != InitialSpec::Source::snapshot)
            need(c.initial->d == c.grid->d, "initial.d must match grid.d");
        break;
    case ExperimentKind::decay_check:
        need(mixture_data, "requires mixture 'initial' data (random or mixtures)");
        need(c.initial->d <= 2, "tail mass needs d <= 2");
        need(!c.time.T_list.empty() && !c.time.N.empty(), "requires 'time.T_list' and 'time.N'");
        break;
    case ExperimentKind::thickness:
        need(c.omega.has_value(), "requires 'omega'");
        break;
    case ExperimentKind::spectral_fit:
        need(c.omega.has_value(), "requires 'omega'");
        need(c.grid.has_value(), "requires 'grid'");
        break;
    case ExperimentKind::interp_verify:
        need(c.omega.has_value(), "requires 'omega'");
        need(mixture_data, "requires mixture 'initial' data (random or mixtures)");
        need(!c.time.T_list.empty() && !c.time.alpha.empty(), "requires 'time.T_list' and 'time.alpha'");
        need(c.constants.C1_norm.has_value() || c.grid.has_value(), "requires 'constants.C1_norm' or a 'grid' to fit it");
        break;
    case ExperimentKind::telescope:
        need(c.omega.has_value(), "requires 'omega'");
        need(mixture_data, "requires mixture 'initial' data (random or mixtures)");
        need(c.time.has_E, "requires 'time.E'");
        need(!c.time.E.empty(), "'time.E' must contain at least one interval");
        need(c.constants.C1_norm.has_value() || c.grid.has_value(), "requires 'constants.C1_norm' or a 'grid' to fit it");
        break;
    }
    return c;
}

/// Fully resolved config, defaults included.
inline json resolved_json(const ExperimentConfig& c) {
    json j{{"kind", kind_name(c.kind)}, {"seed", c.seed}, {"output_dir", c.output_dir}, {"plots", c.plots}};
    if (c.grid) j["grid"] = {{"d", c.grid->d}, {"points", c.grid->points}, {"half_width", c.grid->half_width}};
    if (c.initial) {
        const auto& s = *c.initial;
        json i{{"d", s.d}};
        switch (s.source) {
        case InitialSpec::Source::random:
            i["random"] = {{"count", s.count},
                           {"terms", s.random.terms},
                           {"min_eigenvalue", s.random.min_eigenvalue},
                           {"max_eigenvalue", s.random.max_eigenvalue},
                           {"center_radius", s.random.center_radius},
                           {"phase_radius", s.random.phase_radius}};
            break;
        case InitialSpec::Source::mixtures: i["mixtures"] = s.mixtures; break;
        case InitialSpec::Source::snapshot: i["snapshot"] = s.snapshot; break;
        }
        j["initial"] = i;
    }
    if (c.omega) j["omega"] = to_json(*c.omega);
    json t{{"T", c.time.T}, {"times", c.time.times}, {"T_list", c.time.T_list}, {"alpha", c.time.alpha},
           {"N", c.time.N}, {"lambda", c.time.lambda}};
    if (c.time.has_E) {
        json e = json::array();
        for (auto [a, b] : c.time.E) e.push_back({a, b});
        t["E"] = e;
    }
    if (c.time.l1) t["l1"] = *c.time.l1;
    j["time"] = t;
    json k = json::object();
    if (c.constants.c_exponent) k["c_exponent"] = *c.constants.c_exponent;
    if (c.constants.C3) k["C3"] = *c.constants.C3;
    if (c.constants.C1_norm) k["C1_norm"] = *c.constants.C1_norm;
    j["constants"] = k;
    const auto& o = c.options;
    j["options"] = {{"random_samples", o.random_samples},
                    {"adversarial_samples", o.adversarial_samples},
                    {"power_iterations", o.power_iterations},
                    {"r", o.r},
                    {"sampling_step", o.sampling_step},
                    {"pointwise_samples", o.pointwise_samples},
                    {"sample_step", o.sample_step},
                    {"max_panel", o.max_panel}};
    if (o.delta) j["options"]["delta"] = *o.delta;
    return j;
}

} // namespace kolmo::lab
