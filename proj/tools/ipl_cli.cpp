// ipl_cli: runs one experiment per invocation and writes CSV/PGM artifacts
// plus a replayable manifest into the output directory.

#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ipl/ipl.hpp"

namespace fs = std::filesystem;
using namespace ipl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

const std::vector<std::string> kGlobalKeys = {"seed", "out"};

// shortest text that reads back to the same double
std::string to_text(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}
std::string to_text(int v) { return std::to_string(v); }
std::string to_text(const std::string& v) { return v; }
std::string to_text(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + to_text(v[i]);
    return s;
}

/// Registers options on a subcommand and remembers how to print their final
/// values for the manifest.
class ParamSet {
public:
    template <class T>
    CLI::Option* add(CLI::App* app, const std::string& name, T& ref, const std::string& help) {
        entries_.push_back({name, [&ref] { return to_text(ref); }});
        CLI::Option* opt = app->add_option("--" + name, ref, help)->capture_default_str();
        if constexpr (std::is_same_v<T, std::vector<double>>)
            opt->delimiter(',');
        return opt;
    }

    std::vector<std::pair<std::string, std::string>> values() const {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& e : entries_)
            out.emplace_back(e.first, e.second());
        return out;
    }

private:
    std::vector<std::pair<std::string, std::function<std::string()>>> entries_;
};

struct RunContext {
    std::string command;
    std::uint64_t seed = 42;
    fs::path out = "./out";
    std::optional<fs::path> config;
    std::vector<fs::path> artifacts;

    fs::path file(const std::string& name) {
        artifacts.push_back(out / name);
        return out / name;
    }
};

// ---------------------------------------------------------------- tank

struct TankArgs {
    std::vector<double> obs = {0.0791, 0.158};
    std::vector<double> init = {3.0, 0.01};
    std::vector<double> truth = {4.0, 0.02};
    double alpha = 8e-9;
    int kmax = 10000;
    int jmax = 40;
    double gamma = 0.1;
    double kappa = 0.5;
    std::string beta = "PRP";
    std::vector<double> sweep = {1e-12, 1e-11, 1e-10, 1e-9, 8e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4};
};

void require_pair(const std::vector<double>& v, const std::string& name) {
    if (v.size() != 2)
        throw DomainError("--" + name + " expects two comma-separated values");
}

int run_tank(const TankArgs& a, RunContext& ctx) {
    require_pair(a.obs, "obs");
    require_pair(a.init, "init");
    require_pair(a.truth, "truth");
    if (!(a.alpha >= 0.0))
        throw DomainError("--alpha must be >= 0");
    CgConfig cfg;
    cfg.beta_rule = parse_beta_rule(a.beta);
    cfg.gamma = a.gamma;
    cfg.kappa = a.kappa;
    cfg.j_max = a.jmax;
    cfg.k_max = a.kmax;
    cfg.validate();
    const TankObservation obs{a.obs[0], a.obs[1]};
    const TankObservation truth{a.truth[0], a.truth[1]};
    const TankParams p0{a.init[0], a.init[1]};

    const IterTrace tr = tank_solve_cg(obs, a.alpha, p0, cfg);
    std::vector<double> k, x, y, cost;
    for (std::size_t i = 0; i < tr.records.size(); ++i) {
        k.push_back(static_cast<double>(i));
        x.push_back(tr.records[i].x(0));
        y.push_back(tr.records[i].x(1));
        cost.push_back(tr.records[i].cost);
    }
    emit_csv(ctx.file("tank_trace.csv"), {{"k", k}, {"x", x}, {"y", y}, {"cost", cost}});
    if (tr.aborted) {
        std::cerr << "tank: iteration aborted: " << tr.diagnostic << "\n";
        return kExitNumerical;
    }

    std::vector<double> al, sx, sy, eps, eps_obs;
    for (double alpha : a.sweep) {
        if (!(alpha >= 0.0))
            throw DomainError("--sweep values must be >= 0");
        const IterTrace s = tank_solve_cg(obs, alpha, p0, cfg);
        if (s.aborted) {
            std::cerr << "tank: sweep at alpha=" << to_text(alpha) << " aborted: " << s.diagnostic << "\n";
            return kExitNumerical;
        }
        const TankParams p = to_tank_params(s.final().x);
        const TankErrors e = tank_error_metrics(p, obs, truth);
        al.push_back(alpha);
        sx.push_back(p.x);
        sy.push_back(p.y);
        eps.push_back(e.eps_est);
        eps_obs.push_back(*e.eps_obs);
    }
    emit_csv(ctx.file("tank_sweep.csv"), {{"alpha", al}, {"x", sx}, {"y", sy}, {"eps_est", eps}, {"eps_obs", eps_obs}});

    std::cout << "tank: final x=" << to_text(x.back()) << " y=" << to_text(y.back())
              << " cost=" << to_text(cost.back()) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- heat

struct HeatArgs {
    double T = 1.0;
    int nx = 512;
    int modes = 64;
    double alpha = 1e-4;
    double noise = 0.03;
    std::string method = "tikhonov";
    double omega = 0.0;
    int iterations = 200;
};

double parabola(double x) { return x * (std::numbers::pi - x); }

SpectralFilter heat_filter(const HeatArgs& a) {
    if (a.method == "tikhonov")
        return SpectralFilter::tikhonov(a.alpha);
    if (a.method == "truncated")
        return SpectralFilter::truncated(a.alpha);
    if (a.method == "none")
        return SpectralFilter::none();
    if (a.method == "landweber")
        return SpectralFilter::landweber(a.omega, a.iterations);
    throw DomainError("--method must be one of tikhonov, truncated, landweber, none");
}

int run_heat(HeatArgs a, RunContext& ctx) {
    const HeatProblem prob{a.T, a.modes};
    prob.validate();
    if (a.method == "landweber" && a.omega == 0.0)
        a.omega = 0.9 * std::exp(2.0 * a.T);
    const SpectralFilter filter = heat_filter(a);
    const HeatGrid f = HeatGrid::sample(a.nx, parabola);
    const HeatGrid g = heat_forward(f, prob);
    const HeatGrid gd = multiplicative_noise(g, a.noise, make_rng(ctx.seed)).first;
    const HeatGrid rec = heat_invert(gd, prob, filter);
    std::vector<double> x(a.nx);
    for (int i = 0; i < a.nx; ++i)
        x[i] = f.x(i);
    auto col = [](const HeatGrid& h) { return std::vector<double>(h.values.data(), h.values.data() + h.n_x()); };
    emit_csv(ctx.file("heat.csv"), {{"x", x}, {"f_true", col(f)}, {"g", col(g)}, {"g_delta", col(gd)}, {"f_rec", col(rec)}});
    std::cout << "heat: sup error " << to_text((rec.values - f.values).cwiseAbs().maxCoeff()) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- landweber

struct LandweberArgs {
    double T = 1.0;
    int nx = 128;
    int modes = 64;
    double omega = 0.0;
    double relax = 0.9;
    int iterations = 200;
    double noise = 0.0;
};

int run_landweber(const LandweberArgs& a, RunContext& ctx) {
    const HeatProblem prob{a.T, a.modes};
    const LinearOperatorPair op = heat_operator(prob);
    const double omega = a.omega > 0.0 ? a.omega : a.relax / (op.norm_bound * op.norm_bound);
    const HeatGrid f = HeatGrid::sample(a.nx, parabola);
    const HeatGrid g = heat_forward(f, prob);
    const HeatGrid gd = multiplicative_noise(g, a.noise, make_rng(ctx.seed)).first;
    std::vector<double> m, res, err;
    const Vector fm = landweber(op, gd.values, omega, a.iterations, Vector::Zero(a.nx), [&](int k, const Vector& v) {
        m.push_back(k);
        res.push_back((op.apply(v) - gd.values).norm());
        err.push_back((v - f.values).cwiseAbs().maxCoeff());
    });
    std::vector<double> x(a.nx);
    for (int i = 0; i < a.nx; ++i)
        x[i] = f.x(i);
    emit_csv(ctx.file("landweber.csv"), {{"x", x},
                                         {"f_true", std::vector<double>(f.values.data(), f.values.data() + a.nx)},
                                         {"f_rec", std::vector<double>(fm.data(), fm.data() + a.nx)}});
    emit_csv(ctx.file("landweber_history.csv"), {{"m", m}, {"residual", res}, {"sup_error", err}});
    std::cout << "landweber: omega=" << to_text(omega) << " final residual " << to_text(res.back()) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- born / rytov

struct BornArgs {
    double k = 1.0;
    double ell = 1.0;
    double R = 1.0;
    double Ra = 0.5;
    double eta = 0.2;
    int nr = 128;
    int ms = 23;
    int rank = 10;
    int order = 3;
};

RadialDotConfig born_config(const BornArgs& a) {
    RadialDotConfig c;
    c.k = a.k;
    c.ell = a.ell;
    c.R = a.R;
    c.R_a = a.Ra;
    c.eta_a = a.eta;
    c.N_r = a.nr;
    c.M_S = a.ms;
    c.n_max = a.ms;
    c.validate();
    if (a.rank < 1 || a.rank > std::min(a.ms, a.nr))
        throw DomainError("--rank must lie in 1..min(ms, nr)");
    if (a.order < 1)
        throw DomainError("--order must be >= 1");
    return c;
}

std::vector<double> as_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

int run_series(const BornArgs& a, RunContext& ctx, bool rytov) {
    const RadialDotConfig cfg = born_config(a);
    const BornModel model(cfg);
    const Vector eta_true = target_profile(cfg);
    const Vector phi = forward_phi(cfg);
    const RytovModel ry(model);
    const Matrix k1 = rytov ? ry.j1_matrix() : model.k1_matrix();
    const Matrix inv = truncated_pseudoinverse(k1, a.rank);
    const Vector proj = inv * k1 * eta_true;

    const SeriesReconstruction rec =
        rytov ? inverse_rytov_reconstruct(rytov_data(phi, model.incident_boundary()), a.order, ry, inv)
              : inverse_born_reconstruct(phi, a.order, model, inv);
    if (!rec.profile.allFinite())
        throw NumericalError("series reconstruction produced non-finite values");

    const std::string stem = rytov ? "rytov" : "born";
    std::vector<Column> cols = {{"r", as_std(radial_grid(cfg))}, {"eta_true", as_std(eta_true)},
                                {"projection", as_std(proj)}, {"eta", as_std(rec.profile)}};
    for (std::size_t n = 0; n < rec.terms.size(); ++n)
        cols.push_back({"term" + std::to_string(n + 1), as_std(rec.terms[n])});
    emit_csv(ctx.file(stem + ".csv"), cols);

    std::vector<double> order, norm, err;
    Vector partial = Vector::Zero(cfg.N_r);
    for (std::size_t n = 0; n < rec.terms.size(); ++n) {
        partial += rec.terms[n];
        order.push_back(static_cast<double>(n + 1));
        norm.push_back(rec.terms[n].norm());
        err.push_back((partial - proj).norm() / proj.norm());
    }
    emit_csv(ctx.file(stem + "_terms.csv"), {{"n", order}, {"term_norm", norm}, {"rel_error_vs_projection", err}});

    if (!rytov) {
        const NormDiagnostics d = norm_diagnostics(model);
        std::vector<double> n4, meas, bound;
        for (std::size_t n = 0; n < d.measured.size(); ++n) {
            n4.push_back(static_cast<double>(n + 1));
            meas.push_back(d.measured[n]);
            bound.push_back(d.bounds[n]);
        }
        emit_csv(ctx.file("born_norms.csv"), {{"n", n4}, {"measured", meas}, {"bound", bound}});
        std::cout << "born: mu_inf=" << to_text(d.mu_inf) << " nu_inf=" << to_text(d.nu_inf) << "\n";
    }
    std::cout << stem << ": relative error vs projection " << to_text(err.back()) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- radon

struct RadonArgs {
    int nl = 128;
    int nphi = 256;
    int ns = 128;
    double smax = default_s_max;
    double taumax = 100.0;
    double sigma = 0.0;
    std::string data = "analytic";
    int oversample = 8;
};

int run_radon(const RadonArgs& a, RunContext& ctx) {
    Sinogram sino;
    if (a.data == "analytic")
        sino = annulus_sinogram_analytic(a.nphi, a.ns, a.smax);
    else if (a.data == "numeric")
        sino = radon_transform(annulus_phantom(a.nl), a.nphi, a.ns, a.smax);
    else
        throw DomainError("--data must be analytic or numeric");
    sino = sinogram_noise(sino, a.sigma, make_rng(ctx.seed)).first;
    FbpOptions opt;
    opt.oversample = a.oversample;
    const ImageGrid img = fbp_reconstruct(sino, a.taumax, a.nl, opt);
    if (!img.values.allFinite())
        throw NumericalError("reconstruction produced non-finite values");
    emit_pgm(ctx.file("radon.pgm"), img);
    ctx.artifacts.push_back(pgm_scale_path(ctx.out / "radon.pgm"));
    std::vector<double> x1, x2, mu;
    for (int b = 0; b < img.size(); ++b)
        for (int c = 0; c < img.size(); ++c) {
            x1.push_back(img.coord(c));
            x2.push_back(img.coord(b));
            mu.push_back(img.values(c, b));
        }
    emit_csv(ctx.file("radon.csv"), {{"x1", x1}, {"x2", x2}, {"mu", mu}});
    const RingStats st = ring_stats(img);
    emit_csv(ctx.file("radon_stats.csv"), {{"ring_mean", {st.ring_mean}},
                                           {"hole_mean", {st.hole_mean}},
                                           {"ring_std", {st.ring_std}},
                                           {"hole_std", {st.hole_std}},
                                           {"contrast", {st.contrast}}});
    std::cout << "radon: ring mean " << to_text(st.ring_mean) << ", hole mean " << to_text(st.hole_mean)
              << ", contrast " << to_text(st.contrast) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- svdcheck

struct SvdcheckArgs {
    int trials = 50;
};

Matrix gaussian_matrix(int m, int n, RngState& s) {
    Matrix a(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            auto [v, next] = normal_sample(s, 0.0, 1.0);
            a(i, j) = v;
            s = next;
        }
    return a;
}

int run_svdcheck(const SvdcheckArgs& a, RunContext& ctx) {
    if (a.trials < 1)
        throw DomainError("--trials must be >= 1");
    RngState rng = make_rng(ctx.seed);
    struct Row {
        std::string name;
        double worst;
        double tol;
    };
    std::vector<Row> rows;
    double recon = 0, tik = 0, bound = 0, lw = 0;
    for (int t = 0; t < a.trials; ++t) {
        const int m = 2 + t % 7, n = 2 + (3 * t) % 9;
        const Matrix k = gaussian_matrix(m, n, rng);
        const Vector g = gaussian_matrix(m, 1, rng).col(0);
        const DenseSingularSystem s = svd_decompose(k);
        recon = std::max(recon, (k - s.reconstruct()).norm() / k.norm());
        const double alpha = std::pow(10.0, -3.0 + 6.0 * t / a.trials);
        const Vector x1 = tikhonov_solve_matrix(k, g, alpha);
        const Vector x2 = apply_filtered_inverse(s, SpectralFilter::tikhonov(alpha), g);
        tik = std::max(tik, (x1 - x2).norm() / std::max(1.0, x2.norm()));
        Matrix r(n, m);
        for (int j = 0; j < m; ++j)
            r.col(j) = tikhonov_solve_matrix(k, Vector::Unit(m, j), alpha);
        bound = std::max(bound, svd_decompose(r).sigmas(0) - 1.0 / (2.0 * std::sqrt(alpha)));
        const double omega = 0.9 / (s.sigmas(0) * s.sigmas(0));
        const Vector f = landweber(matrix_operator(k, s.sigmas(0)), g, omega, 25, Vector::Zero(n));
        const Vector fr = apply_filtered_inverse(s, SpectralFilter::landweber(omega, 25), g);
        lw = std::max(lw, (f - fr).norm() / std::max(1.0, fr.norm()));
    }
    rows.push_back({"svd_reconstruction", recon, 1e-10});
    rows.push_back({"tikhonov_normal_equations_vs_svd", tik, 1e-10});
    rows.push_back({"tikhonov_norm_minus_half_root_alpha", bound, 1e-9});
    rows.push_back({"landweber_vs_spectral_filter", lw, 1e-10});

    const CostFn bowl = [](const Vector& v) { return 0.5 * v.squaredNorm(); };
    const GradFn bowl_grad = [](const Vector& v) { return v; };
    double cg = 0.0;
    for (BetaRule rule : {BetaRule::PRP, BetaRule::FR, BetaRule::HS}) {
        CgConfig cfg;
        cfg.beta_rule = rule;
        cfg.k_max = 100;
        cg = std::max(cg, nonlinear_cg(bowl, bowl_grad, Vector::Ones(3), cfg).final().x.norm());
    }
    rows.push_back({"cg_quadratic_bowl", cg, 1e-6});

    std::vector<double> idx, worst, tol, pass;
    bool ok = true;
    std::cout << "check                                  worst          tol    result\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const bool p = rows[i].worst <= rows[i].tol;
        ok = ok && p;
        std::cout << std::left << std::setw(38) << rows[i].name << " " << std::setw(14) << to_text(rows[i].worst)
                  << " " << std::setw(6) << to_text(rows[i].tol) << " " << (p ? "PASS" : "FAIL") << "\n";
        idx.push_back(static_cast<double>(i + 1));
        worst.push_back(rows[i].worst);
        tol.push_back(rows[i].tol);
        pass.push_back(p ? 1.0 : 0.0);
    }
    emit_csv(ctx.file("svdcheck.csv"), {{"check", idx}, {"worst", worst}, {"tol", tol}, {"pass", pass}});
    return ok ? kExitOk : kExitNumerical;
}

// ---------------------------------------------------------------- driver

void write_manifest(const RunContext& ctx, const ParamSet& params, double seconds) {
    std::ofstream os = open_output(ctx.out / (ctx.command + ".manifest"));
    os << "command=" << ctx.command << "\n";
    os << "seed=" << ctx.seed << "\n";
    os << "out=" << ctx.out.string() << "\n";
    for (const auto& [k, v] : params.values())
        os << k << "=" << v << "\n";
    os << "# duration_seconds=" << to_text(seconds) << "\n";
    for (const fs::path& p : ctx.artifacts)
        os << "# artifact=" << p.string() << "\n";
    if (!os)
        throw IoError("cannot write manifest in " + ctx.out.string());
}

/// Splices config entries into argv so that explicit flags, which come
/// later, win: global keys go before the subcommand, the rest right after it.
std::vector<std::string> apply_config(const std::vector<std::string>& args, const std::vector<std::string>& commands) {
    std::optional<std::string> path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (!path)
        return args;
    const auto entries = read_config(*path);

    std::vector<std::string> global, local;
    std::optional<std::string> command;
    for (const auto& [k, v] : entries) {
        if (k == "command")
            command = v;
        else if (std::find(kGlobalKeys.begin(), kGlobalKeys.end(), k) != kGlobalKeys.end())
            global.push_back("--" + k + "=" + v);
        else
            local.push_back("--" + k + "=" + v);
    }

    std::vector<std::string> out = {args[0]};
    out.insert(out.end(), global.begin(), global.end());
    std::size_t sub = args.size();
    for (std::size_t i = 1; i < args.size(); ++i)
        if (std::find(commands.begin(), commands.end(), args[i]) != commands.end()) {
            sub = i;
            break;
        }
    if (sub == args.size()) {
        if (!command)
            return out.insert(out.end(), args.begin() + 1, args.end()), out;
        out.insert(out.end(), args.begin() + 1, args.end());
        out.push_back(*command);
        out.insert(out.end(), local.begin(), local.end());
        return out;
    }
    out.insert(out.end(), args.begin() + 1, args.begin() + static_cast<long>(sub) + 1);
    out.insert(out.end(), local.begin(), local.end());
    out.insert(out.end(), args.begin() + static_cast<long>(sub) + 1, args.end());
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inverse problems experiments: tank, heat, landweber, born, rytov, radon, svdcheck"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.fallthrough();
    app.require_subcommand(1);

    RunContext ctx;
    std::string out_dir = "./out";
    std::string config_path;
    app.add_option("--seed", ctx.seed, "seed for every noise draw")->capture_default_str();
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--config", config_path, "key=value file, overridden by explicit flags");

    std::map<std::string, ParamSet> params;

    TankArgs tank;
    CLI::App* s_tank = app.add_subcommand("tank", "water tank parameters by regularized nonlinear CG");
    {
        ParamSet& p = params["tank"];
        p.add(s_tank, "obs", tank.obs, "observed A1,A2");
        p.add(s_tank, "init", tank.init, "initial x,y");
        p.add(s_tank, "truth", tank.truth, "true x,y for eps_obs");
        p.add(s_tank, "alpha", tank.alpha, "regularization weight");
        p.add(s_tank, "kmax", tank.kmax, "CG iterations");
        p.add(s_tank, "jmax", tank.jmax, "line-search halvings");
        p.add(s_tank, "gamma", tank.gamma, "Armijo constant");
        p.add(s_tank, "kappa", tank.kappa, "step reduction factor");
        p.add(s_tank, "beta", tank.beta, "PRP, FR or HS");
        p.add(s_tank, "sweep", tank.sweep, "alpha values for the sweep CSV");
    }

    HeatArgs heat;
    CLI::App* s_heat = app.add_subcommand("heat", "recover the initial heat profile x(pi - x)");
    {
        ParamSet& p = params["heat"];
        p.add(s_heat, "T", heat.T, "final time");
        p.add(s_heat, "nx", heat.nx, "interior grid points");
        p.add(s_heat, "modes", heat.modes, "sine modes");
        p.add(s_heat, "alpha", heat.alpha, "regularization parameter");
        p.add(s_heat, "noise", heat.noise, "multiplicative noise level");
        p.add(s_heat, "method", heat.method, "tikhonov, truncated, landweber or none");
        p.add(s_heat, "omega", heat.omega, "Landweber relaxation (0: 0.9 / |K|^2)");
        p.add(s_heat, "iterations", heat.iterations, "Landweber iterations");
    }

    LandweberArgs lw;
    CLI::App* s_lw = app.add_subcommand("landweber", "Landweber iteration on the heat system");
    {
        ParamSet& p = params["landweber"];
        p.add(s_lw, "T", lw.T, "final time");
        p.add(s_lw, "nx", lw.nx, "interior grid points");
        p.add(s_lw, "modes", lw.modes, "sine modes");
        p.add(s_lw, "omega", lw.omega, "relaxation (0: relax / |K|^2)");
        p.add(s_lw, "relax", lw.relax, "omega |K|^2 when --omega is 0");
        p.add(s_lw, "iterations", lw.iterations, "iterations");
        p.add(s_lw, "noise", lw.noise, "multiplicative noise level");
    }

    BornArgs born, rytov;
    CLI::App* s_born = app.add_subcommand("born", "inverse Born series for the radial target");
    CLI::App* s_rytov = app.add_subcommand("rytov", "inverse Rytov series for the radial target");
    for (auto [sub, args, name] : {std::tuple{s_born, &born, "born"}, std::tuple{s_rytov, &rytov, "rytov"}}) {
        ParamSet& p = params[name];
        p.add(sub, "k", args->k, "background wavenumber");
        p.add(sub, "ell", args->ell, "Robin length");
        p.add(sub, "R", args->R, "disk radius");
        p.add(sub, "Ra", args->Ra, "target radius");
        p.add(sub, "eta", args->eta, "target contrast");
        p.add(sub, "nr", args->nr, "radial cells");
        p.add(sub, "ms", args->ms, "source modes");
        p.add(sub, "rank", args->rank, "kept singular values");
        p.add(sub, "order", args->order, "series order N");
    }

    RadonArgs radon;
    CLI::App* s_radon = app.add_subcommand("radon", "filtered back projection of the annulus");
    {
        ParamSet& p = params["radon"];
        p.add(s_radon, "nl", radon.nl, "image half size N_L");
        p.add(s_radon, "nphi", radon.nphi, "angle steps");
        p.add(s_radon, "ns", radon.ns, "offset half count");
        p.add(s_radon, "smax", radon.smax, "largest offset");
        p.add(s_radon, "taumax", radon.taumax, "filter bandwidth");
        p.add(s_radon, "sigma", radon.sigma, "noise level");
        p.add(s_radon, "data", radon.data, "analytic or numeric sinogram");
        p.add(s_radon, "oversample", radon.oversample, "filter table samples per offset step");
    }

    SvdcheckArgs svd;
    CLI::App* s_svd = app.add_subcommand("svdcheck", "spectral and optimizer property checks");
    params["svdcheck"].add(s_svd, "trials", svd.trials, "random matrices");

    std::vector<std::string> names;
    for (const CLI::App* s : app.get_subcommands([](const CLI::App*) { return true; }))
        names.push_back(s->get_name());

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = apply_config(args, names);
        std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    CLI::App* chosen = app.get_subcommands().front();
    ctx.command = chosen->get_name();
    ctx.out = out_dir;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        std::error_code ec;
        fs::create_directories(ctx.out, ec);
        if (ec || !fs::is_directory(ctx.out))
            throw IoError("cannot create output directory " + ctx.out.string());
        int code = kExitOk;
        if (ctx.command == "tank")
            code = run_tank(tank, ctx);
        else if (ctx.command == "heat")
            code = run_heat(heat, ctx);
        else if (ctx.command == "landweber")
            code = run_landweber(lw, ctx);
        else if (ctx.command == "born")
            code = run_series(born, ctx, false);
        else if (ctx.command == "rytov")
            code = run_series(rytov, ctx, true);
        else if (ctx.command == "radon")
            code = run_radon(radon, ctx);
        else
            code = run_svdcheck(svd, ctx);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(ctx, params[ctx.command], secs);
        return code;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const DomainError& e) {
        std::cerr << "invalid value: " << e.what() << "\n";
        return kExitUsage;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition violated: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
