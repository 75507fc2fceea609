#include "frtm/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "frtm/io.hpp"
#include "frtm/parallel.hpp"
#include "frtm/version.hpp"

namespace frtm {

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    int jobs = 0;
    std::string out;

    // simulate
    std::string preset;
    int n = 500;
    std::uint64_t stream = 0;
    // phase1
    std::string train, tune;
    // phase2 / evaluate / plotdata
    std::string bundle, data, results;
    std::optional<double> change_point;
    std::optional<double> change_point_fraction;
};

struct Manifest {
    std::string command;
    std::vector<std::string> inputs, outputs;
};

json load_config(const Options& o) {
    if (o.config.empty()) return json::object();
    json j = read_json(o.config);
    if (!j.is_object()) throw Error(ErrorKind::InvalidInput, "config must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (k != "generator" && k != "pipeline")
            throw Error(ErrorKind::InvalidInput, "unknown config section '" + k + "'");
    return j;
}

void require_out(const Options& o) {
    if (o.out.empty()) throw Error(ErrorKind::InvalidInput, "--out is required");
}

void write_manifest(const std::string& path, const Options& o, const Manifest& m, double seconds) {
    json j = {{"command", m.command},
              {"config", o.config.empty() ? json(nullptr) : json(o.config)},
              {"seed", o.seed ? json(*o.seed) : json(nullptr)},
              {"jobs", o.jobs},
              {"inputs", m.inputs},
              {"outputs", m.outputs},
              {"seconds", seconds},
              {"version", kVersion}};
    write_json(path, j);
}

Manifest cmd_simulate(const Options& o) {
    require_out(o);
    const json cfg = load_config(o);
    GenConfig g = cfg.contains("generator") ? gen_config_from_json(cfg.at("generator")) : GenConfig{};
    if (!o.preset.empty()) {
        GenConfig p = preset(o.preset);
        p.seed = g.seed;
        p.stream = g.stream;
        p.n_points = g.n_points;
        g = p;
    }
    if (o.seed) g.seed = *o.seed;
    g.stream = o.stream;
    g.validate();
    if (o.n < 0) throw Error(ErrorKind::InvalidInput, "--n must be >= 0");
    if (o.n == 0) std::cerr << "warning: --n 0 writes an empty batch\n";
    const auto curves = g.shift == Shift::None ? draw_ic(g, o.n) : draw_oc(g, o.n);
    write_json(o.out, to_json(make_batch(g, curves)));
    return {"simulate", {}, {o.out}};
}

Manifest cmd_phase1(const Options& o) {
    require_out(o);
    const json cfg = load_config(o);
    PipelineConfig p = cfg.contains("pipeline") ? pipeline_config_from_json(cfg.at("pipeline")) : PipelineConfig{};
    if (o.seed) p.seed = *o.seed;
    const Batch train = batch_from_json(read_json(o.train));
    const Batch tune = batch_from_json(read_json(o.tune));
    const Phase1Artifacts art = phase1(train.samples(), tune.samples(), p);
    write_json(o.out, to_json(art));
    std::cout << "lambda " << art.lambda.lambda << ", smoothing " << art.smoothing << ", grid "
              << art.scheme.grid.size() << " points, " << art.failed_steps << " failed registrations\n";
    return {"phase1", {o.train, o.tune}, {o.out}};
}

Manifest cmd_phase2(const Options& o) {
    require_out(o);
    const Phase1Artifacts art = artifacts_from_json(read_json(o.bundle));
    const Batch data = batch_from_json(read_json(o.data));
    std::vector<std::optional<double>> cps = data.change_points();
    if (o.change_point) cps.assign(cps.size(), o.change_point);
    if (o.change_point_fraction)
        for (std::size_t i = 0; i < cps.size(); ++i) {
            const auto& a = data.curves[i].samples.abscissae;
            cps[i] = a(a.size() - 1) * *o.change_point_fraction;
        }
    const Phase2Output out = phase2(art, data.samples(), std::nullopt, cps, data.ids());
    fs::create_directories(o.out);
    const std::string rj = (fs::path(o.out) / "results.json").string();
    const std::string rc = (fs::path(o.out) / "results.csv").string();
    const std::string sj = (fs::path(o.out) / "summary.json").string();
    const json full = to_json(out);
    write_json(rj, full);
    write_text(rc, results_csv(out));
    write_json(sj, full.at("summary"));
    if (out.summary) {
        std::cout << out.summary->curves << " curves, " << out.summary->failed << " failed";
        if (out.summary->rates.far) std::cout << ", FAR " << *out.summary->rates.far;
        if (out.summary->rates.tdr) std::cout << ", TDR " << *out.summary->rates.tdr;
        std::cout << '\n';
    } else {
        std::cout << "no curves\n";
    }
    return {"phase2", {o.bundle, o.data}, {rj, rc, sj}};
}

Manifest cmd_evaluate(const Options& o) {
    Phase2Output r = results_from_json(read_json(o.results));
    if (o.change_point && o.change_point_fraction)
        throw Error(ErrorKind::InvalidInput, "give --change-point or --change-point-fraction, not both");
    for (auto& m : r.results) {
        if (o.change_point) m.change_point_x = o.change_point;
        if (o.change_point_fraction) m.change_point_x = m.domain_end * *o.change_point_fraction;
    }
    const FarTdr rates = far_tdr(r.results);
    int failed = 0;
    for (const auto& m : r.results) failed += !m.error.empty();
    std::ostringstream t;
    t.precision(17);
    t << "curves,failed,far,tdr\n" << r.results.size() << ',' << failed << ',';
    if (rates.far) t << *rates.far;
    t << ',';
    if (rates.tdr) t << *rates.tdr;
    t << '\n';
    std::cout << t.str();
    Manifest m{"evaluate", {o.results}, {}};
    if (!o.out.empty()) {
        write_text(o.out, t.str());
        m.outputs.push_back(o.out);
    }
    return m;
}

Manifest cmd_plotdata(const Options& o) {
    require_out(o);
    const Phase2Output r = results_from_json(read_json(o.results));
    fs::create_directories(o.out);
    Manifest m{"plotdata", {o.results}, {}};
    for (const auto& c : r.results) {
        std::ostringstream s;
        s.precision(17);
        s << "x,t2,t2_limit,spe,spe_limit,alarm\n";
        for (const auto& p : c.points) {
            if (!p.monitorable) continue;
            s << p.x << ',' << p.t2 << ',' << p.t2_limit << ',' << p.spe << ',' << p.spe_limit << ',' << int(p.alarm)
              << '\n';
        }
        std::string name = c.curve_id;
        for (char& ch : name)
            if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
        const std::string path = (fs::path(o.out) / ("chart_" + name + ".csv")).string();
        write_text(path, s.str());
        m.outputs.push_back(path);
    }
    return m;
}

std::string manifest_path(const Manifest& m, const Options& o) {
    if (m.command == "phase2" || m.command == "plotdata") return (fs::path(o.out) / "manifest.json").string();
    if (!o.out.empty()) return o.out + ".manifest.json";
    return (fs::path(o.results).parent_path() / "evaluate.manifest.json").string();
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Functional real-time monitoring of partially observed curves", "frtm"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config, "JSON config with optional 'generator' and 'pipeline' sections");
    app.add_option("--seed", o.seed, "Seed for data generation and the template initialisation");
    app.add_option("--jobs", o.jobs, "Worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
    app.add_option("--out", o.out, "Output file or directory");

    auto* sim = app.add_subcommand("simulate", "Draw a batch of synthetic curves");
    sim->add_option("--preset", o.preset, "Preset such as S1-M1 or S1-M1-ShiftB-0.3-1");
    sim->add_option("--n", o.n, "Number of curves");
    sim->add_option("--stream", o.stream, "Independent stream index for the same seed");
    auto* p1 = app.add_subcommand("phase1", "Fit the control scheme");
    p1->add_option("--train", o.train, "Training batch")->required();
    p1->add_option("--tune", o.tune, "Tuning batch")->required();
    auto* p2 = app.add_subcommand("phase2", "Monitor a batch against a Phase I bundle");
    p2->add_option("--bundle", o.bundle, "Phase I bundle")->required();
    p2->add_option("--data", o.data, "Batch to monitor")->required();
    auto* cp2 = p2->add_option("--change-point", o.change_point, "Shared change point (observed time)");
    p2->add_option("--change-point-fraction", o.change_point_fraction, "Change point as a fraction of each duration")
        ->excludes(cp2);
    auto* ev = app.add_subcommand("evaluate", "FAR/TDR of monitoring results");
    ev->add_option("--results", o.results, "results.json from phase2")->required();
    auto* cpe = ev->add_option("--change-point", o.change_point, "Shared change point (observed time)");
    ev->add_option("--change-point-fraction", o.change_point_fraction, "Change point as a fraction of each duration")
        ->excludes(cpe);
    auto* pd = app.add_subcommand("plotdata", "Per-curve chart series as CSV");
    pd->add_option("--results", o.results, "results.json from phase2")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        set_jobs(o.jobs);
        const auto t0 = std::chrono::steady_clock::now();
        Manifest m;
        if (*sim) m = cmd_simulate(o);
        else if (*p1) m = cmd_phase1(o);
        else if (*p2) m = cmd_phase2(o);
        else if (*ev) m = cmd_evaluate(o);
        else m = cmd_plotdata(o);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(manifest_path(m, o), o, m, secs);
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.is_validation() ? 2 : 3;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"frtm"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(int(argv.size()), argv.data());
}

}  // namespace frtm
