#include "mssv/cli.hpp"

#include "CLI11.hpp"

#include "mssv/calibration.hpp"
#include "mssv/io.hpp"
#include "mssv/mc.hpp"
#include "mssv/model.hpp"
#include "mssv/oracle.hpp"
#include "mssv/path.hpp"
#include "mssv/pricing.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mssv::cli {

namespace {

/// "lo:hi:n" (n evenly spaced points) or a comma-separated list.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    if (std::count(text.begin(), text.end(), ':') == 2) {
        const auto p1 = text.find(':');
        const auto p2 = text.find(':', p1 + 1);
        const double lo = std::stod(text.substr(0, p1));
        const double hi = std::stod(text.substr(p1 + 1, p2 - p1 - 1));
        const int n = std::stoi(text.substr(p2 + 1));
        if (n < 1) throw std::invalid_argument("grid '" + text + "': count must be >= 1");
        for (int i = 0; i < n; ++i) out.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw std::invalid_argument("empty grid '" + text + "'");
    return out;
}

ModelSpec load_model(const std::string& path) { return model_spec_from_json(Json::parse(read_text_file(path))); }

struct ParamsFile {
    GroupParams gp;
    std::optional<double> r;
};

ParamsFile load_params(const std::string& path) {
    const Json j = Json::parse(read_text_file(path));
    ParamsFile p{group_params_from_json(j), std::nullopt};
    if (j.contains("r")) p.r = j.at("r").get<double>();
    return p;
}

struct McFlags {
    std::size_t paths = 100000;
    std::uint64_t seed = 1;
    int workers = 0;
    bool no_control = false;

    void add(CLI::App* app) {
        app->add_option("--paths", paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
        app->add_option("--seed", seed, "RNG seed");
        app->add_option("--workers", workers, "worker threads (default: MSSV_DEFAULT_WORKERS or all cores)")
            ->check(CLI::NonNegativeNumber);
        app->add_flag("--no-control", no_control, "disable control variates");
    }
    McConfig config() const { return {paths, seed, workers, !no_control}; }
};

struct PayoffFlags {
    std::string payoff = "vanilla-call";
    double strike = 100.0;
    double maturity = 1.0;
    double s0 = 100.0;

    void add(CLI::App* app) {
        app->add_option("--payoff", payoff, "vanilla-call|vanilla-put|geo-asian-call|geo-asian-put|qv-linear");
        app->add_option("--strike", strike, "strike")->check(CLI::PositiveNumber);
        app->add_option("--T", maturity, "maturity in years")->check(CLI::PositiveNumber);
        app->add_option("--s0", s0, "spot price")->check(CLI::PositiveNumber);
    }
};

Json report_json(const CorrectionReport& rep) {
    return Json{{"p0", rep.p0},
                {"p10_eps", to_json(rep.p10_eps)},
                {"p01_delta", to_json(rep.p01_delta)},
                {"total", rep.total},
                {"method", to_string(rep.method)},
                {"mode", to_string(rep.mode)},
                {"sigma", rep.sigma}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multiscale stochastic volatility pricing toolkit", "mssv"};
    app.require_subcommand(1);
    // outputs staged here and written after success
    std::vector<std::pair<std::string, std::string>> files;
    Json summary;

    // simulate-ou
    auto* ou = app.add_subcommand("simulate-ou", "exact OU path to CSV (time,value)");
    double ou_kappa = 1.0, ou_m = 0.0, ou_nu = 1.0, ou_y0 = 0.0, ou_T = 1.0;
    int ou_steps = 1000;
    std::uint64_t ou_seed = 1;
    std::string ou_out = "ou.csv";
    ou->add_option("--kappa", ou_kappa, "mean-reversion rate")->required()->check(CLI::PositiveNumber);
    ou->add_option("--m", ou_m, "long-run mean")->required();
    ou->add_option("--nu", ou_nu, "stationary standard deviation")->required()->check(CLI::NonNegativeNumber);
    ou->add_option("--y0", ou_y0, "initial value");
    ou->add_option("--T", ou_T, "horizon")->check(CLI::PositiveNumber);
    ou->add_option("--steps", ou_steps, "grid steps")->check(CLI::PositiveNumber);
    ou->add_option("--seed", ou_seed, "RNG seed");
    ou->add_option("--out", ou_out, "output CSV");
    ou->callback([&] {
        const Path p = simulate_ou(ou_kappa, ou_m, ou_nu, ou_y0, GridSpec{0.0, ou_T, ou_steps}, ou_seed);
        std::ostringstream csv;
        write_path_csv(csv, p);
        files.emplace_back(ou_out, csv.str());
        summary = Json{{"command", "simulate-ou"}, {"out", ou_out}, {"nodes", p.size()}, {"y_T", p.back()}};
    });

    // simulate
    auto* sim = app.add_subcommand("simulate", "full-model path (time,s,y,z) to CSV");
    std::string sim_model, sim_out = "paths.csv";
    double sim_s0 = 100.0, sim_y0 = 0.0, sim_z0 = 0.3, sim_T = 1.0;
    int sim_steps = 1000;
    std::uint64_t sim_seed = 1;
    sim->add_option("--model", sim_model, "model JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--s0", sim_s0, "initial price")->check(CLI::PositiveNumber);
    sim->add_option("--y0", sim_y0, "initial fast factor");
    sim->add_option("--z0", sim_z0, "initial slow factor");
    sim->add_option("--T", sim_T, "horizon")->check(CLI::PositiveNumber);
    sim->add_option("--steps", sim_steps, "grid steps")->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_seed, "RNG seed");
    sim->add_option("--out", sim_out, "output CSV");
    sim->callback([&] {
        const ModelSpec spec = load_model(sim_model);
        const FullPaths p = simulate_full(spec, sim_s0, sim_y0, sim_z0, GridSpec{0.0, sim_T, sim_steps}, sim_seed);
        CsvTable t;
        t.header = {"time", "s", "y", "z"};
        for (std::size_t i = 0; i < p.s.size(); ++i) t.rows.push_back({p.s.time_at(i), p.s[i], p.y[i], p.z[i]});
        files.emplace_back(sim_out, to_csv(t));
        summary = Json{{"command", "simulate"}, {"out", sim_out}, {"nodes", p.s.size()}, {"s_T", p.s.back()}};
    });

    // price-full
    auto* pf = app.add_subcommand("price-full", "full-model Monte Carlo price");
    std::string pf_model, pf_out;
    PayoffFlags pf_pay;
    McFlags pf_mc;
    double pf_y0 = 0.0, pf_z0 = 0.3;
    int pf_steps = 0;
    bool pf_no_hedge = false;
    pf->add_option("--model", pf_model, "model JSON")->required()->check(CLI::ExistingFile);
    pf_pay.add(pf);
    pf_mc.add(pf);
    pf->add_option("--y0", pf_y0, "initial fast factor");
    pf->add_option("--z0", pf_z0, "initial slow factor")->check(CLI::PositiveNumber);
    pf->add_option("--steps", pf_steps, "grid steps (default: 20 T / eps)")->check(CLI::PositiveNumber);
    pf->add_flag("--no-hedge", pf_no_hedge, "disable the delta-hedge control variate");
    pf->add_option("--out", pf_out, "also write the JSON result to this file");
    pf->callback([&] {
        const ModelSpec spec = load_model(pf_model);
        const auto oracle = make_oracle(pf_pay.payoff, pf_pay.strike, pf_pay.maturity, spec.r);
        const int steps = pf_steps > 0 ? pf_steps : static_cast<int>(std::ceil(20.0 * pf_pay.maturity / spec.eps));
        std::optional<HedgeControl> hedge;
        if (!pf_no_hedge) hedge = HedgeControl{oracle.get(), group_params(spec, pf_z0).sigma_star};
        const Estimate e = full_model_price(spec, oracle->payoff(), Path(0.0, pf_pay.maturity / steps, {pf_pay.s0}),
                                            pf_y0, pf_z0, GridSpec{0.0, pf_pay.maturity, steps}, pf_mc.config(),
                                            hedge);
        summary = Json{{"command", "price-full"}, {"payoff", oracle->name()}, {"steps", steps}, {"estimate", to_json(e)}};
        if (!pf_out.empty()) files.emplace_back(pf_out, dump_json(summary) + "\n");
    });

    // price-approx
    auto* pa = app.add_subcommand("price-approx", "first-order approximation (JSON report)");
    std::string pa_params, pa_model, pa_out, pa_method = "closed", pa_mode = "reduced";
    PayoffFlags pa_pay;
    McFlags pa_mc;
    std::optional<double> pa_rate;
    double pa_z0 = 0.3;
    int pa_steps = 1000;
    auto* pa_params_opt = pa->add_option("--params", pa_params, "group parameters JSON")->check(CLI::ExistingFile);
    auto* pa_model_opt = pa->add_option("--model", pa_model, "model JSON (group parameters computed at --z0)")
                             ->check(CLI::ExistingFile);
    pa_params_opt->excludes(pa_model_opt);
    pa_pay.add(pa);
    pa_mc.add(pa);
    pa->add_option("--rate", pa_rate, "risk-free rate (overrides the params file)");
    pa->add_option("--z0", pa_z0, "slow factor level for --model")->check(CLI::PositiveNumber);
    pa->add_option("--method", pa_method, "closed|feynman_kac|exact");
    pa->add_option("--mode", pa_mode, "reduced|unreduced");
    pa->add_option("--steps", pa_steps, "Feynman-Kac time steps")->check(CLI::PositiveNumber);
    pa->add_option("--out", pa_out, "also write the JSON report to this file");
    pa->callback([&] {
        if (pa_params.empty() && pa_model.empty()) throw CLI::RequiredError("--params or --model");
        GroupParams gp;
        double r = 0.0;
        if (!pa_params.empty()) {
            const ParamsFile p = load_params(pa_params);
            gp = p.gp;
            if (pa_rate) r = *pa_rate;
            else if (p.r) r = *p.r;
            else throw CLI::RequiredError("--rate (or \"r\" in the params file)");
        } else {
            const ModelSpec spec = load_model(pa_model);
            gp = group_params(spec, pa_z0);
            r = pa_rate.value_or(spec.r);
        }
        const auto oracle = make_oracle(pa_pay.payoff, pa_pay.strike, pa_pay.maturity, r);
        const Path x(0.0, pa_pay.maturity / pa_steps, {pa_pay.s0});
        const CorrectionReport rep = first_order_price(*oracle, gp, x, parse_method(pa_method),
                                                       FkConfig{pa_steps, 1e-4}, pa_mc.config(),
                                                       parse_sigma_mode(pa_mode));
        summary = Json{{"command", "price-approx"}, {"payoff", oracle->name()}, {"group_params", to_json(gp)},
                       {"report", report_json(rep)}};
        if (!pa_out.empty()) files.emplace_back(pa_out, dump_json(summary) + "\n");
    });

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "fit the affine implied-vol approximation");
    std::string cal_quotes, cal_out;
    std::string cal_inversion = "first-order";
    double cal_spot = 100.0, cal_rate = 0.0, cal_t = 0.0;
    cal->add_option("--quotes", cal_quotes, "quotes CSV with header K,T,iv")->required()->check(CLI::ExistingFile);
    cal->add_option("--spot", cal_spot, "spot price")->required()->check(CLI::PositiveNumber);
    cal->add_option("--rate", cal_rate, "risk-free rate")->required();
    cal->add_option("--t", cal_t, "valuation time");
    cal->add_option("--inversion", cal_inversion, "first-order|exact")->check(CLI::IsMember({"first-order", "exact"}));
    cal->add_option("--out", cal_out, "also write the group parameters JSON to this file");
    cal->callback([&] {
        std::ifstream in(cal_quotes);
        const auto quotes = read_quotes_csv(in);
        const SmileFit fit = fit_smile(quotes, SurfaceContext{cal_spot, cal_rate, cal_t});
        const GroupParams gp = coeffs_to_params(fit.coeffs, cal_rate, parse_inversion(cal_inversion));
        Json params = to_json(gp);
        params["r"] = cal_rate;
        summary = Json{{"command", "calibrate"},
                       {"coeffs",
                        Json{{"b_star", fit.coeffs.b_star},
                             {"b_delta", fit.coeffs.b_delta},
                             {"a_eps", fit.coeffs.a_eps},
                             {"a_delta", fit.coeffs.a_delta}}},
                       {"rms_residual", fit.rms_residual},
                       {"max_abs_residual", fit.max_abs_residual},
                       {"group_params", params}};
        if (!cal_out.empty()) files.emplace_back(cal_out, dump_json(params) + "\n");
    });

    // synth-surface
    auto* syn = app.add_subcommand("synth-surface", "implied-vol surface from group parameters (CSV K,T,iv)");
    std::string syn_params, syn_out = "surface.csv", syn_strikes = "70:130:13", syn_mats = "0.2:2:7";
    std::optional<double> syn_rate;
    double syn_spot = 100.0, syn_t = 0.0;
    syn->add_option("--params", syn_params, "group parameters JSON")->required()->check(CLI::ExistingFile);
    syn->add_option("--rate", syn_rate, "risk-free rate (overrides the params file)");
    syn->add_option("--spot", syn_spot, "spot price")->check(CLI::PositiveNumber);
    syn->add_option("--t", syn_t, "valuation time");
    syn->add_option("--strikes", syn_strikes, "lo:hi:n or comma list");
    syn->add_option("--maturities", syn_mats, "lo:hi:n or comma list");
    syn->add_option("--out", syn_out, "output CSV");
    syn->callback([&] {
        const ParamsFile p = load_params(syn_params);
        if (!syn_rate && !p.r) throw CLI::RequiredError("--rate (or \"r\" in the params file)");
        const double r = syn_rate ? *syn_rate : *p.r;
        const auto quotes =
            synthesize_surface(p.gp, r, parse_grid(syn_strikes), parse_grid(syn_mats), syn_spot, syn_t);
        files.emplace_back(syn_out, quotes_to_csv(quotes));
        summary = Json{{"command", "synth-surface"}, {"out", syn_out}, {"quotes", quotes.size()}};
    });

    // accuracy-sweep
    auto* sw = app.add_subcommand("accuracy-sweep", "full model vs first-order error across scales");
    std::string sw_model, sw_out = "sweep.csv", sw_scales = "0.1,0.025,0.00625", sw_method = "closed";
    PayoffFlags sw_pay;
    McFlags sw_mc;
    double sw_y0 = 0.0, sw_z0 = 0.3, sw_steps_per_eps = 20.0;
    bool sw_no_hedge = false;
    sw->add_option("--model", sw_model, "model JSON (eps and del are overridden)")->required()->check(CLI::ExistingFile);
    sw_pay.add(sw);
    sw_mc.add(sw);
    sw->add_option("--y0", sw_y0, "initial fast factor");
    sw->add_option("--z0", sw_z0, "initial slow factor")->check(CLI::PositiveNumber);
    sw->add_option("--scales", sw_scales, "comma list of eps = del values");
    sw->add_option("--steps-per-eps", sw_steps_per_eps, "full-model steps per unit of T/eps (>= 10)");
    sw->add_option("--method", sw_method, "closed|feynman_kac|exact");
    sw->add_flag("--no-hedge", sw_no_hedge, "disable the delta-hedge control variate");
    sw->add_option("--out", sw_out, "output CSV");
    sw->callback([&] {
        const ModelSpec spec = load_model(sw_model);
        const auto oracle = make_oracle(sw_pay.payoff, sw_pay.strike, sw_pay.maturity, spec.r);
        std::vector<std::pair<double, double>> scales;
        for (double e : parse_grid(sw_scales)) scales.emplace_back(e, e);
        SweepConfig cfg;
        cfg.steps_per_eps = sw_steps_per_eps;
        cfg.method = parse_method(sw_method);
        cfg.hedge = !sw_no_hedge;
        const SweepResult res = accuracy_sweep(spec, *oracle, scales, Path(0.0, 1.0, {sw_pay.s0}), sw_y0, sw_z0,
                                               sw_mc.config(), cfg);
        CsvTable t;
        t.header = {"eps", "delta", "error", "stderr"};
        Json flagged = Json::array();
        for (const auto& row : res.rows) {
            t.rows.push_back({row.eps, row.del, row.error, row.stderr_});
            flagged.push_back(row.flagged);
        }
        files.emplace_back(sw_out, to_csv(t));
        summary = Json{{"command", "accuracy-sweep"},
                       {"out", sw_out},
                       {"slope", res.slope},
                       {"points_used", res.points_used},
                       {"flagged", flagged}};
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_runtime;
    }

    try {
        for (const auto& [path, contents] : files) write_text_file_atomic(path, contents);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_runtime;
    }
    out << dump_json(summary) << "\n";
    return exit_ok;
}

}  // namespace mssv::cli
