#include "frtm/io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

namespace frtm {

namespace {

constexpr const char* kBatchFormat = "frtm-batch";
constexpr const char* kBundleFormat = "frtm-phase1";
constexpr const char* kResultsFormat = "frtm-results";

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
    if (!j.is_object()) throw Error(ErrorKind::InvalidInput, std::string(what) + " must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw Error(ErrorKind::InvalidInput, std::string("unknown key '") + k + "' in " + what);
    }
}

void check_header(const json& j, const char* format) {
    if (!j.is_object() || !j.contains("format") || j.at("format") != format)
        throw Error(ErrorKind::InvalidInput, std::string("not a ") + format + " document");
    const int v = j.at("schema_version").get<int>();
    if (v != kSchemaVersion)
        throw Error(ErrorKind::VersionMismatch, std::string(format) + " schema version " + std::to_string(v) +
                                                    ", this build reads version " + std::to_string(kSchemaVersion));
}

// Wraps json access errors into InvalidInput.
template <typename F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("malformed ") + what + ": " + e.what());
    }
}

json interval(Interval d) { return json::array({d.lo, d.hi}); }
Interval interval_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json curve(const Curve& c) { return {{"knots", vec(c.knots())}, {"coefficients", vec(c.coefficients())}}; }
Curve curve_from(const json& j) { return Curve(vec_from(j.at("knots")), vec_from(j.at("coefficients"))); }

json mixed(const MixedObservation& z) {
    return {{"domain", interval(z.domain)}, {"x_star", vec(z.x_star)}, {"v", vec(z.v)}, {"f0", z.f0},
            {"f1_tilde", z.f1_tilde}};
}
MixedObservation mixed_from(const json& j) {
    MixedObservation z;
    z.domain = interval_from(j.at("domain"));
    z.x_star = vec_from(j.at("x_star"));
    z.v = vec_from(j.at("v"));
    z.f0 = j.at("f0").get<double>();
    z.f1_tilde = j.at("f1_tilde").get<double>();
    return z;
}

json weights(const Weights& w) {
    return {{"w1", vec(w.w1)}, {"w2", vec(w.w2)}, {"w3", w.w3}, {"w4", w.w4}, {"k", w.k}, {"degenerate", w.degenerate}};
}
Weights weights_from(const json& j) {
    Weights w;
    w.w1 = vec_from(j.at("w1"));
    w.w2 = vec_from(j.at("w2"));
    w.w3 = j.at("w3").get<double>();
    w.w4 = j.at("w4").get<double>();
    w.k = j.at("k").get<std::array<double, 4>>();
    w.degenerate = j.at("degenerate").get<std::array<bool, 4>>();
    return w;
}

json model(const MfpcaModel& m) {
    json comps = json::array();
    for (const auto& c : m.components) comps.push_back(mixed(c));
    return {{"truncation_time", m.truncation_time},
            {"domain", interval(m.domain)},
            {"points", m.points},
            {"mean", mixed(m.mean)},
            {"components", comps},
            {"eigenvalues", vec(m.eigenvalues)},
            {"all_eigenvalues", vec(m.all_eigenvalues)},
            {"weights", weights(m.weights)},
            {"explained_fraction", m.explained_fraction},
            {"total_variance", m.total_variance}};
}
MfpcaModel model_from(const json& j) {
    MfpcaModel m;
    m.truncation_time = j.at("truncation_time").get<double>();
    m.domain = interval_from(j.at("domain"));
    m.points = j.at("points").get<int>();
    m.mean = mixed_from(j.at("mean"));
    for (const auto& c : j.at("components")) m.components.push_back(mixed_from(c));
    m.eigenvalues = vec_from(j.at("eigenvalues"));
    m.all_eigenvalues = vec_from(j.at("all_eigenvalues"));
    m.weights = weights_from(j.at("weights"));
    m.explained_fraction = j.at("explained_fraction").get<double>();
    m.total_variance = j.at("total_variance").get<double>();
    if (m.eigenvalues.size() != m.retained())
        throw Error(ErrorKind::InvalidInput, "model eigenvalue and component counts differ");
    return m;
}

json slack(Slack s) { return {{"t", s.t}, {"x", s.x}}; }
Slack slack_from(const json& j) { return {j.at("t").get<double>(), j.at("x").get<double>()}; }

json band(const Band& b) {
    return {{"grid", vec(b.grid)},
            {"lower", vec(b.lower)},
            {"upper", vec(b.upper)},
            {"b_level", b.b_level},
            {"template_domain", interval(b.template_domain)},
            {"start_slack", slack(b.start_slack)}};
}
Band band_from(const json& j) {
    Band b;
    b.grid = vec_from(j.at("grid"));
    b.lower = vec_from(j.at("lower"));
    b.upper = vec_from(j.at("upper"));
    b.b_level = j.at("b_level").get<double>();
    b.template_domain = interval_from(j.at("template_domain"));
    b.start_slack = slack_from(j.at("start_slack"));
    return b;
}

json registration(const RegistrationParams& p) {
    return {{"lambda", p.lambda},   {"s_min", p.s_min},
            {"s_max", p.s_max},     {"n_t", p.n_t},
            {"m_x", p.m_x},         {"refinement_rounds", p.refinement_rounds},
            {"alpha_grid", p.alpha_grid}, {"slope_target", opt(p.slope_target)}};
}
RegistrationParams registration_from(const json& j, RegistrationParams p = {}) {
    check_keys(j, {"lambda", "s_min", "s_max", "n_t", "m_x", "refinement_rounds", "alpha_grid", "slope_target"},
               "registration");
    if (j.contains("lambda")) p.lambda = j.at("lambda").get<double>();
    if (j.contains("s_min")) p.s_min = j.at("s_min").get<double>();
    if (j.contains("s_max")) p.s_max = j.at("s_max").get<double>();
    if (j.contains("n_t")) p.n_t = j.at("n_t").get<int>();
    if (j.contains("m_x")) p.m_x = j.at("m_x").get<int>();
    if (j.contains("refinement_rounds")) p.refinement_rounds = j.at("refinement_rounds").get<int>();
    if (j.contains("alpha_grid")) p.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
    if (j.contains("slope_target")) p.slope_target = opt_from(j.at("slope_target"));
    return p;
}

json realtime(const RealtimeParams& p) {
    return {{"registration", registration(p.registration)},
            {"adaptive", p.adaptive},
            {"delta_Delta", p.delta_Delta},
            {"delta_v", p.delta_v},
            {"delta_d", p.delta_d},
            {"delta_c", p.delta_c},
            {"slope_window", p.slope_window}};
}
RealtimeParams realtime_from(const json& j, RealtimeParams p = {}) {
    check_keys(j, {"registration", "adaptive", "delta_Delta", "delta_v", "delta_d", "delta_c", "slope_window"},
               "realtime");
    if (j.contains("registration")) p.registration = registration_from(j.at("registration"), p.registration);
    if (j.contains("adaptive")) p.adaptive = j.at("adaptive").get<bool>();
    if (j.contains("delta_Delta")) p.delta_Delta = j.at("delta_Delta").get<double>();
    if (j.contains("delta_v")) p.delta_v = j.at("delta_v").get<double>();
    if (j.contains("delta_d")) p.delta_d = j.at("delta_d").get<double>();
    if (j.contains("delta_c")) p.delta_c = j.at("delta_c").get<double>();
    if (j.contains("slope_window")) p.slope_window = j.at("slope_window").get<double>();
    return p;
}

json limits(const ControlLimits& l) {
    return {{"alpha", l.alpha},   {"alpha_star", l.alpha_star}, {"t2", vec(l.t2)},
            {"spe", vec(l.spe)},  {"pooled", l.pooled},         {"bandwidth_fallbacks", l.bandwidth_fallbacks}};
}
ControlLimits limits_from(const json& j) {
    ControlLimits l;
    l.alpha = j.at("alpha").get<double>();
    l.alpha_star = j.at("alpha_star").get<double>();
    l.t2 = vec_from(j.at("t2"));
    l.spe = vec_from(j.at("spe"));
    l.pooled = j.at("pooled").get<std::vector<int>>();
    l.bandwidth_fallbacks = j.at("bandwidth_fallbacks").get<int>();
    return l;
}

json lambda_sel(const LambdaSelection& s) {
    return {{"lambda", s.lambda},         {"acd_zero", s.acd_zero},     {"acd_infinity", s.acd_infinity},
            {"grid", s.grid},             {"acd_values", s.acd_values}, {"no_phase_variation", s.no_phase_variation}};
}
LambdaSelection lambda_sel_from(const json& j) {
    LambdaSelection s;
    s.lambda = j.at("lambda").get<double>();
    s.acd_zero = j.at("acd_zero").get<double>();
    s.acd_infinity = j.at("acd_infinity").get<double>();
    s.grid = j.at("grid").get<std::vector<double>>();
    s.acd_values = j.at("acd_values").get<std::vector<double>>();
    s.no_phase_variation = j.at("no_phase_variation").get<bool>();
    return s;
}

const char* scenario_name(Scenario s) { return s == Scenario::S1 ? "S1" : "S2"; }
Scenario scenario_from(const std::string& s) {
    if (s == "S1") return Scenario::S1;
    if (s == "S2") return Scenario::S2;
    throw Error(ErrorKind::InvalidInput, "scenario must be S1 or S2");
}
const char* shift_str(Shift s) {
    switch (s) {
        case Shift::A: return "A";
        case Shift::B: return "B";
        case Shift::C: return "C";
        case Shift::None: break;
    }
    return "None";
}
Shift shift_from(const std::string& s) {
    if (s == "None") return Shift::None;
    if (s == "A") return Shift::A;
    if (s == "B") return Shift::B;
    if (s == "C") return Shift::C;
    throw Error(ErrorKind::InvalidInput, "shift must be None, A, B or C");
}

json truth(const CurveTruth& t) {
    return {{"scenario", scenario_name(t.scenario)},
            {"T", t.T},
            {"a", t.a},
            {"b", t.b},
            {"s", t.s},
            {"e", t.e},
            {"t_b", t.t_b},
            {"t_e", t.t_e},
            {"shift", shift_str(t.shift)},
            {"delta_g", t.delta.delta_g},
            {"delta_h2", t.delta.delta_h2},
            {"delta_end", t.delta.delta_end},
            {"x_star_out", t.x_star_out},
            {"x_out", t.x_out},
            {"t_out", t.t_out},
            {"T_out", t.T_out},
            {"change_point", opt(t.change_point())}};
}
CurveTruth truth_from(const json& j) {
    CurveTruth t;
    t.scenario = scenario_from(j.at("scenario").get<std::string>());
    t.T = j.at("T").get<double>();
    t.a = j.at("a").get<double>();
    t.b = j.at("b").get<double>();
    t.s = j.at("s").get<double>();
    t.e = j.at("e").get<double>();
    t.t_b = j.at("t_b").get<double>();
    t.t_e = j.at("t_e").get<double>();
    t.shift = shift_from(j.at("shift").get<std::string>());
    t.delta.delta_g = j.at("delta_g").get<double>();
    t.delta.delta_h2 = j.at("delta_h2").get<double>();
    t.delta.delta_end = j.at("delta_end").get<double>();
    t.x_star_out = j.at("x_star_out").get<double>();
    t.x_out = j.at("x_out").get<double>();
    t.t_out = j.at("t_out").get<double>();
    t.T_out = j.at("T_out").get<double>();
    return t;
}

json point(const ChartPoint& p) {
    return {{"x", p.x},         {"monitorable", p.monitorable}, {"t_star", p.t_star},
            {"t2", p.t2},       {"spe", p.spe},                 {"t2_limit", p.t2_limit},
            {"spe_limit", p.spe_limit}, {"alarm", p.alarm},     {"error", p.error}};
}
ChartPoint point_from(const json& j) {
    ChartPoint p;
    p.x = j.at("x").get<double>();
    p.monitorable = j.at("monitorable").get<bool>();
    p.t_star = j.at("t_star").get<double>();
    p.t2 = j.at("t2").get<double>();
    p.spe = j.at("spe").get<double>();
    p.t2_limit = j.at("t2_limit").get<double>();
    p.spe_limit = j.at("spe_limit").get<double>();
    p.alarm = j.at("alarm").get<bool>();
    p.error = j.at("error").get<std::string>();
    return p;
}

}  // namespace

std::vector<SampledCurve> Batch::samples() const {
    std::vector<SampledCurve> out;
    for (const auto& c : curves) out.push_back(c.samples);
    return out;
}

std::vector<std::string> Batch::ids() const {
    std::vector<std::string> out;
    for (const auto& c : curves) out.push_back(c.id);
    return out;
}

std::vector<std::optional<double>> Batch::change_points() const {
    std::vector<std::optional<double>> out;
    for (const auto& c : curves) out.push_back(c.truth ? c.truth->change_point() : std::nullopt);
    return out;
}

Batch make_batch(const GenConfig& config, const std::vector<SimulatedCurve>& curves) {
    Batch b;
    b.generator = config;
    for (std::size_t i = 0; i < curves.size(); ++i)
        b.curves.push_back({std::to_string(i), curves[i].samples, curves[i].truth});
    return b;
}

json to_json(const Batch& b) {
    json curves = json::array();
    for (const auto& c : b.curves) {
        json e = {{"id", c.id}, {"abscissae", vec(c.samples.abscissae)}, {"values", vec(c.samples.values)}};
        if (c.truth) e["truth"] = truth(*c.truth);
        curves.push_back(std::move(e));
    }
    return {{"format", kBatchFormat},
            {"schema_version", kSchemaVersion},
            {"generator", b.generator ? to_json(*b.generator) : json(nullptr)},
            {"curves", curves}};
}

Batch batch_from_json(const json& j) {
    return guarded("batch", [&] {
        check_header(j, kBatchFormat);
        check_keys(j, {"format", "schema_version", "generator", "curves"}, "batch");
        Batch b;
        if (j.contains("generator") && !j.at("generator").is_null())
            b.generator = gen_config_from_json(j.at("generator"));
        for (const auto& e : j.at("curves")) {
            check_keys(e, {"id", "abscissae", "values", "truth"}, "batch curve");
            BatchCurve c;
            c.id = e.at("id").get<std::string>();
            c.samples.abscissae = vec_from(e.at("abscissae"));
            c.samples.values = vec_from(e.at("values"));
            c.samples.validate();
            if (e.contains("truth")) c.truth = truth_from(e.at("truth"));
            b.curves.push_back(std::move(c));
        }
        return b;
    });
}

json to_json(const Phase1Artifacts& a) {
    json models = json::array();
    for (const auto& m : a.scheme.family.models) models.push_back(model(m));
    return {{"format", kBundleFormat},
            {"schema_version", kSchemaVersion},
            {"config", to_json(a.config)},
            {"smoothing", a.smoothing},
            {"template", curve(a.tmpl)},
            {"lambda", lambda_sel(a.lambda)},
            {"slope_target", a.slope_target},
            {"monitoring_domain", interval(a.monitoring_domain)},
            {"setup",
             {{"band", band(a.setup.band)},
              {"params", realtime(a.setup.params)},
              {"grid", vec(a.setup.grid)},
              {"monitoring_domain", interval(a.setup.monitoring_domain)},
              {"smoothing", a.setup.smoothing}}},
            {"scheme",
             {{"grid", vec(a.scheme.grid)},
              {"limits", limits(a.scheme.limits)},
              {"times", vec(a.scheme.family.times)},
              {"models", models}}},
            {"tuning_t2", a.tuning_t2},
            {"tuning_spe", a.tuning_spe},
            {"fallback_pairs", a.fallback_pairs},
            {"failed_steps", a.failed_steps}};
}

Phase1Artifacts artifacts_from_json(const json& j) {
    return guarded("bundle", [&] {
        check_header(j, kBundleFormat);
        Phase1Artifacts a;
        a.config = pipeline_config_from_json(j.at("config"));
        a.smoothing = j.at("smoothing").get<double>();
        a.tmpl = curve_from(j.at("template"));
        a.lambda = lambda_sel_from(j.at("lambda"));
        a.slope_target = j.at("slope_target").get<double>();
        a.monitoring_domain = interval_from(j.at("monitoring_domain"));
        const json& s = j.at("setup");
        a.setup.tmpl = a.tmpl;
        a.setup.band = band_from(s.at("band"));
        a.setup.params = realtime_from(s.at("params"));
        a.setup.grid = vec_from(s.at("grid"));
        a.setup.monitoring_domain = interval_from(s.at("monitoring_domain"));
        a.setup.smoothing = s.at("smoothing").get<double>();
        const json& c = j.at("scheme");
        a.scheme.grid = vec_from(c.at("grid"));
        a.scheme.limits = limits_from(c.at("limits"));
        a.scheme.family.times = vec_from(c.at("times"));
        for (const auto& m : c.at("models")) a.scheme.family.models.push_back(model_from(m));
        a.tuning_t2 = j.at("tuning_t2").get<std::vector<std::vector<double>>>();
        a.tuning_spe = j.at("tuning_spe").get<std::vector<std::vector<double>>>();
        a.fallback_pairs = j.at("fallback_pairs").get<int>();
        a.failed_steps = j.at("failed_steps").get<int>();
        a.validate();
        return a;
    });
}

json to_json(const Phase2Output& o) {
    json curves = json::array();
    for (const auto& r : o.results) {
        json pts = json::array();
        for (const auto& p : r.points) pts.push_back(point(p));
        curves.push_back({{"id", r.curve_id},
                          {"change_point_x", opt(r.change_point_x)},
                          {"first_alarm_x", opt(r.first_alarm_x)},
                          {"domain_end", r.domain_end},
                          {"error", r.error},
                          {"points", pts}});
    }
    json summary = nullptr;
    if (o.summary)
        summary = {{"curves", o.summary->curves},
                   {"failed", o.summary->failed},
                   {"far", opt(o.summary->rates.far)},
                   {"tdr", opt(o.summary->rates.tdr)}};
    return {{"format", kResultsFormat}, {"schema_version", kSchemaVersion}, {"curves", curves}, {"summary", summary}};
}

Phase2Output results_from_json(const json& j) {
    return guarded("results", [&] {
        check_header(j, kResultsFormat);
        Phase2Output o;
        for (const auto& c : j.at("curves")) {
            MonitoringResult r;
            r.curve_id = c.at("id").get<std::string>();
            r.change_point_x = opt_from(c.at("change_point_x"));
            r.first_alarm_x = opt_from(c.at("first_alarm_x"));
            r.domain_end = c.at("domain_end").get<double>();
            r.error = c.at("error").get<std::string>();
            for (const auto& p : c.at("points")) r.points.push_back(point_from(p));
            o.results.push_back(std::move(r));
        }
        const json& s = j.at("summary");
        if (!s.is_null()) {
            Phase2Summary sum;
            sum.curves = s.at("curves").get<int>();
            sum.failed = s.at("failed").get<int>();
            sum.rates.far = opt_from(s.at("far"));
            sum.rates.tdr = opt_from(s.at("tdr"));
            o.summary = sum;
        }
        return o;
    });
}

std::string results_csv(const Phase2Output& o) {
    std::ostringstream s;
    s.precision(17);
    s << "curve_id,x,monitorable,t_star,t2,t2_limit,spe,spe_limit,alarm\n";
    for (const auto& r : o.results)
        for (const auto& p : r.points)
            s << r.curve_id << ',' << p.x << ',' << int(p.monitorable) << ',' << p.t_star << ',' << p.t2 << ','
              << p.t2_limit << ',' << p.spe << ',' << p.spe_limit << ',' << int(p.alarm) << '\n';
    return s.str();
}

json to_json(const PipelineConfig& c) {
    return {{"realtime", realtime(c.realtime)},
            {"alpha", c.alpha},
            {"var_threshold", c.var_threshold},
            {"band_b", c.band_b},
            {"acd_delta", c.acd_delta},
            {"lambda_grid", c.lambda_grid},
            {"lambda_subsample", c.lambda_subsample},
            {"procrustes_iterations", c.procrustes_iterations},
            {"seed", c.seed},
            {"models", c.models},
            {"grid_points", c.grid_points},
            {"start_fraction", c.start_fraction},
            {"slack_fraction", c.slack_fraction},
            {"penalty_divisor", c.penalty_divisor},
            {"quadrature", c.quadrature}};
}

PipelineConfig pipeline_config_from_json(const json& j) {
    return guarded("pipeline config", [&] {
        check_keys(j,
                   {"realtime", "alpha", "var_threshold", "band_b", "acd_delta", "lambda_grid", "lambda_subsample",
                    "procrustes_iterations", "seed", "models", "grid_points", "start_fraction", "slack_fraction",
                    "penalty_divisor", "quadrature"},
                   "pipeline config");
        PipelineConfig c;
        if (j.contains("realtime")) c.realtime = realtime_from(j.at("realtime"));
        if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
        if (j.contains("var_threshold")) c.var_threshold = j.at("var_threshold").get<double>();
        if (j.contains("band_b")) c.band_b = j.at("band_b").get<double>();
        if (j.contains("acd_delta")) c.acd_delta = j.at("acd_delta").get<double>();
        if (j.contains("lambda_grid")) c.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
        if (j.contains("lambda_subsample")) c.lambda_subsample = j.at("lambda_subsample").get<int>();
        if (j.contains("procrustes_iterations")) c.procrustes_iterations = j.at("procrustes_iterations").get<int>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("models")) c.models = j.at("models").get<int>();
        if (j.contains("grid_points")) c.grid_points = j.at("grid_points").get<int>();
        if (j.contains("start_fraction")) c.start_fraction = j.at("start_fraction").get<double>();
        if (j.contains("slack_fraction")) c.slack_fraction = j.at("slack_fraction").get<double>();
        if (j.contains("penalty_divisor")) c.penalty_divisor = j.at("penalty_divisor").get<double>();
        if (j.contains("quadrature")) c.quadrature = j.at("quadrature").get<int>();
        c.validate();
        return c;
    });
}

json to_json(const GenConfig& c) {
    return {{"scenario", scenario_name(c.scenario)},
            {"model", c.model},
            {"sigma_a", c.sigma_a},
            {"sigma_b", c.sigma_b},
            {"sigma_e", c.sigma_e},
            {"sigma_end", c.sigma_end},
            {"sigma_be", c.sigma_be},
            {"mu_end", c.mu_end},
            {"mu_a", c.mu_a},
            {"shift", shift_str(c.shift)},
            {"d", c.d},
            {"x_star_out", c.x_star_out},
            {"seed", c.seed},
            {"stream", c.stream},
            {"n_points", c.n_points}};
}

GenConfig gen_config_from_json(const json& j) {
    return guarded("generator config", [&] {
        check_keys(j,
                   {"preset", "scenario", "model", "sigma_a", "sigma_b", "sigma_e", "sigma_end", "sigma_be", "mu_end",
                    "mu_a", "shift", "d", "x_star_out", "seed", "stream", "n_points"},
                   "generator config");
        GenConfig c = j.contains("preset") ? preset(j.at("preset").get<std::string>()) : GenConfig{};
        if (j.contains("scenario")) c.scenario = scenario_from(j.at("scenario").get<std::string>());
        if (j.contains("model")) c.model = j.at("model").get<int>();
        if (j.contains("sigma_a")) c.sigma_a = j.at("sigma_a").get<double>();
        if (j.contains("sigma_b")) c.sigma_b = j.at("sigma_b").get<double>();
        if (j.contains("sigma_e")) c.sigma_e = j.at("sigma_e").get<double>();
        if (j.contains("sigma_end")) c.sigma_end = j.at("sigma_end").get<double>();
        if (j.contains("sigma_be")) c.sigma_be = j.at("sigma_be").get<double>();
        if (j.contains("mu_end")) c.mu_end = j.at("mu_end").get<double>();
        if (j.contains("mu_a")) c.mu_a = j.at("mu_a").get<double>();
        if (j.contains("shift")) c.shift = shift_from(j.at("shift").get<std::string>());
        if (j.contains("d")) c.d = j.at("d").get<double>();
        if (j.contains("x_star_out")) c.x_star_out = j.at("x_star_out").get<double>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("stream")) c.stream = j.at("stream").get<std::uint64_t>();
        if (j.contains("n_points")) c.n_points = j.at("n_points").get<int>();
        c.validate();
        return c;
    });
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidInput, "'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(1) + "\n"); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    out << text;
    if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

}  // namespace frtm
