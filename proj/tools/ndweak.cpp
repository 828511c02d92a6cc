// ndweak.cpp — batch front-end: structured config in, curve tables and
// reports out. Verbs: run, sweep, verify.
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ndweak/core.hpp"
#include "ndweak/exact_stats.hpp"
#include "ndweak/expansion.hpp"
#include "ndweak/probe.hpp"
#include "ndweak/spinhalf.hpp"
#include "ndweak/verify.hpp"

#include "config.hpp"

namespace fs = std::filesystem;
using namespace ndweak;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "ndweak 1.0.0";

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    return out + "\"";
}

// RFC-4180-style CSV with LF endings and 17-significant-digit numbers.
class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) : path_(path) {
        out_.open(path, std::ios::binary);
        if (!out_) throw ConsistencyError("cannot open output file " + path.string());
        row_strings(header);
    }
    void row(const std::vector<double>& values) {
        std::vector<std::string> s(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) s[i] = fmt(values[i]);
        row_strings(s);
    }
    void row_strings(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << csv_field(fields[i]);
        }
        out_ << '\n';
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
    std::ofstream out_;
};

// ----------------------------- run configuration ---------------------------

struct RunConfig {
    enum class Scenario { SpinHalf, Generic } scenario = Scenario::SpinHalf;

    // spin-half scenario
    Eigen::Vector3d m{0, 0, 1}, n{0, 0, 1}, a{0, 0, 1};

    // generic scenario
    std::vector<double> eigenvalues, frequencies, weights;
    Eigen::MatrixXd rho_i_real, rho_i_imag;

    double delta_k = 1.0, kappa_k = 2.0, kbar = 0.0, xbar = 0.0;
    double lambda = 0.0, tau = 1.0;
    std::string profile_name = "constant";
    double k_H = 10.0;
    std::optional<double> mass;
    double K_D = std::numeric_limits<double>::infinity();
    double epsilon = 1.0 / 12.0;
    std::optional<double> gamma_kBT, deco_mass;
    double k_min = 0.0, k_max = 0.0; // resolved below
    std::size_t n_points = 2048;
    std::set<std::string> quantities{"Q_exact", "Q_interp", "P_post", "moments"};
    double theta_max = 3.0, chi_max = 3.0;
    std::size_t n_theta = 61, n_chi = 61;

    std::string stem; // config filename stem for outputs

    static RunConfig from_file(const std::string& path);
    void validate() const;
    json resolved() const;
};

Eigen::Vector3d parse_vec3(const cli::IniFile& f, const std::string& key,
                           const Eigen::Vector3d& fallback) {
    if (!f.has("spin", key)) return fallback;
    const auto v = f.number_list("spin", key, {});
    if (v.size() != 3)
        throw cli::ParseError("[spin] " + key + ": expected three components");
    return Eigen::Vector3d(v[0], v[1], v[2]);
}

RunConfig RunConfig::from_file(const std::string& path) {
    const cli::IniFile f = cli::IniFile::load(path);
    RunConfig c;
    c.stem = fs::path(path).stem().string();

    const std::string type = f.text("scenario", "type", "spin-half");
    if (type == "spin-half") c.scenario = Scenario::SpinHalf;
    else if (type == "generic") c.scenario = Scenario::Generic;
    else throw cli::ParseError("[scenario] type: expected 'spin-half' or 'generic', got '"
                               + type + "'");

    if (c.scenario == Scenario::SpinHalf) {
        c.a = parse_vec3(f, "a", Eigen::Vector3d::UnitZ());
        if (f.has("spin", "m_angle")) {
            const double th = f.number("spin", "m_angle", 0.0);
            const double len = f.number("spin", "m_len", 1.0);
            c.m = len * Eigen::Vector3d(std::sin(th), 0.0, std::cos(th));
        } else {
            c.m = parse_vec3(f, "m", Eigen::Vector3d::UnitZ());
        }
        if (f.has("spin", "n_angle_from_m")) {
            const double th = f.number("spin", "n_angle_from_m", 0.0);
            const double len = f.number("spin", "n_len", 1.0);
            // rotate m-direction by th within the plane spanned by m and a
            const double m_angle = std::atan2(c.m.head<2>().norm(), c.m.z());
            const double ang = m_angle + th;
            c.n = len * Eigen::Vector3d(std::sin(ang), 0.0, std::cos(ang));
        } else {
            c.n = parse_vec3(f, "n", Eigen::Vector3d::UnitZ());
        }
    } else {
        c.eigenvalues = f.number_list("system", "eigenvalues", {});
        if (c.eigenvalues.empty())
            throw cli::ParseError("[system] eigenvalues: required for the generic scenario");
        c.frequencies = f.number_list("system", "frequencies",
                                      std::vector<double>(c.eigenvalues.size(), 0.0));
        c.weights = f.number_list("system", "weights", {});
        if (c.weights.empty())
            throw cli::ParseError("[system] weights: required for the generic scenario");
        const std::size_t D = c.eigenvalues.size();
        c.rho_i_real = f.matrix("system", "rho_i_real", D);
        c.rho_i_imag = f.matrix("system", "rho_i_imag", D);
        if (!f.has("system", "rho_i_real"))
            throw cli::ParseError("[system] rho_i_real: required for the generic scenario");
    }

    c.delta_k = f.number("probe", "delta_k", 1.0);
    c.kappa_k = f.number("probe", "kappa_k", 2.0 * c.delta_k);
    c.kbar = f.number("probe", "kbar", 0.0);
    c.xbar = f.number("probe", "xbar", 0.0);

    c.lambda = f.number("coupling", "lambda", 0.0);
    c.tau = f.number("coupling", "tau", 1.0);
    c.profile_name = f.text("coupling", "profile", "constant");
    if (c.profile_name != "constant" && c.profile_name != "triangular"
        && c.profile_name != "raised-cosine")
        throw cli::ParseError("[coupling] profile: expected constant, triangular or raised-cosine");

    if (f.has("dispersion", "mass")) c.mass = f.number("dispersion", "mass", 0.0);
    c.k_H = f.number("dispersion", "k_H", 10.0);

    c.K_D = f.number("decoherence", "K_D", std::numeric_limits<double>::infinity());
    c.epsilon = f.number("decoherence", "epsilon", 1.0 / 12.0);
    if (f.has("decoherence", "gamma_kBT"))
        c.gamma_kBT = f.number("decoherence", "gamma_kBT", 0.0);
    if (f.has("decoherence", "deco_mass"))
        c.deco_mass = f.number("decoherence", "deco_mass", 1.0);

    c.k_min = f.number("grid", "k_min", c.kbar - 8.0 * c.delta_k);
    c.k_max = f.number("grid", "k_max", c.kbar + 8.0 * c.delta_k);
    c.n_points = static_cast<std::size_t>(f.number("grid", "n_points", 2048.0));

    if (f.has("outputs", "quantities")) {
        c.quantities.clear();
        std::istringstream is(f.text("outputs", "quantities", ""));
        std::string tok;
        while (std::getline(is, tok, ',')) {
            tok.erase(0, tok.find_first_not_of(" \t"));
            tok.erase(tok.find_last_not_of(" \t") + 1);
            static const std::set<std::string> known{"Q_exact", "Q_interp", "Q_osc",
                                                     "Z", "Zx", "moments", "P_post"};
            if (!known.count(tok))
                throw cli::ParseError("[outputs] quantities: unknown quantity '" + tok + "'");
            c.quantities.insert(tok);
        }
    }
    c.theta_max = f.number("outputs", "theta_max", 3.0);
    c.n_theta = static_cast<std::size_t>(f.number("outputs", "n_theta", 61.0));
    c.chi_max = f.number("outputs", "chi_max", 3.0);
    c.n_chi = static_cast<std::size_t>(f.number("outputs", "n_chi", 61.0));

    f.ensure_all_used();
    c.validate();
    return c;
}

void RunConfig::validate() const {
    if (!(delta_k > 0.0) || !(kappa_k > 0.0) || !(tau > 0.0) || !(k_H > 0.0)
        || !(epsilon > 0.0) || !(K_D > 0.0))
        throw PhysicsError("config: all scale parameters must be positive");
    if (lambda < 0.0) throw PhysicsError("config: lambda must be >= 0");
    if (n_points < 256) throw PhysicsError("config: grid must have at least 256 points");
    if (k_min > kbar - 3.0 * delta_k || k_max < kbar + 3.0 * delta_k)
        throw PhysicsError("config: grid must cover at least 6 Delta_k around kbar");
    if (mass && !(*mass > 0.0)) throw PhysicsError("config: mass must be positive");
}

json RunConfig::resolved() const {
    json j;
    j["scenario"] = scenario == Scenario::SpinHalf ? "spin-half" : "generic";
    if (scenario == Scenario::SpinHalf) {
        j["spin"] = {{"m", {m.x(), m.y(), m.z()}},
                     {"n", {n.x(), n.y(), n.z()}},
                     {"a", {a.x(), a.y(), a.z()}}};
    } else {
        j["system"] = {{"eigenvalues", eigenvalues},
                       {"frequencies", frequencies},
                       {"weights", weights}};
    }
    j["probe"] = {{"delta_k", delta_k}, {"kappa_k", kappa_k}, {"kbar", kbar}, {"xbar", xbar}};
    j["coupling"] = {{"lambda", lambda}, {"tau", tau}, {"profile", profile_name}};
    j["dispersion"] = mass ? json{{"mass", *mass}} : json{{"k_H", k_H}};
    j["decoherence"] = {{"K_D", std::isinf(K_D) ? "inf" : fmt(K_D)}, {"epsilon", epsilon}};
    j["grid"] = {{"k_min", k_min}, {"k_max", k_max}, {"n_points", n_points}};
    j["outputs"] = {{"quantities", std::vector<std::string>(quantities.begin(), quantities.end())},
                    {"theta_max", theta_max}, {"n_theta", n_theta},
                    {"chi_max", chi_max}, {"n_chi", n_chi}};
    return j;
}

// ------------------------------ assembled model -----------------------------

struct Model {
    core::SystemSpec sys;
    core::DensityMatrix rho_i;
    core::PostselectionScheme scheme;
    probe::GaussianProbe probe;
    dynamics::CouplingProfile profile;
    probe::DispersionRelation dispersion;
    std::optional<exact_stats::DecoherenceModel> deco;
    Grid grid;
};

dynamics::CouplingProfile make_profile(const RunConfig& c) {
    if (c.profile_name == "triangular") return dynamics::CouplingProfile::triangular(c.tau, c.lambda);
    if (c.profile_name == "raised-cosine")
        return dynamics::CouplingProfile::raised_cosine(c.tau, c.lambda);
    return dynamics::CouplingProfile::constant(c.tau, c.lambda);
}

Model build_model(const RunConfig& c) {
    auto profile = make_profile(c);
    auto dispersion = c.mass ? probe::DispersionRelation::quadratic(*c.mass)
                             : probe::DispersionRelation::from_hamiltonian_scale(
                                   c.k_H, profile.tau_n(0));
    probe::GaussianProbe probe(c.delta_k, c.kappa_k, c.kbar, c.xbar);
    std::optional<exact_stats::DecoherenceModel> deco;
    if (c.gamma_kBT) {
        deco = exact_stats::DecoherenceModel::from_microscopic(
            *c.gamma_kBT, 1.0, c.epsilon, c.deco_mass.value_or(*dispersion.quadratic_mass));
    } else if (!std::isinf(c.K_D)) {
        deco = exact_stats::DecoherenceModel::from_scale(c.K_D, c.epsilon, c.tau);
    }
    const Grid grid = Grid::spanning(c.k_min, c.k_max, c.n_points);

    if (c.scenario == RunConfig::Scenario::SpinHalf) {
        core::SystemSpec sys({+1.0, -1.0});
        core::DensityMatrix rho_i = core::DensityMatrix::from_bloch(c.m, c.a);
        const double nn = c.n.norm();
        Eigen::MatrixXcd basis(2, 2);
        std::vector<double> weights(2);
        if (nn < 1e-14) {
            basis = Eigen::MatrixXcd::Identity(2, 2);
            weights = {0.5, 0.5};
        } else {
            const auto rf = core::DensityMatrix::from_bloch(c.n / nn, c.a);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rf.matrix());
            basis.col(0) = es.eigenvectors().col(1);
            basis.col(1) = es.eigenvectors().col(0);
            weights = {0.5 * (1.0 + nn), 0.5 * (1.0 - nn)};
        }
        return Model{std::move(sys), std::move(rho_i),
                     core::PostselectionScheme(weights, basis), probe, std::move(profile),
                     std::move(dispersion), deco, grid};
    }

    core::SystemSpec sys(c.eigenvalues, c.frequencies);
    Eigen::MatrixXcd rho(c.rho_i_real.rows(), c.rho_i_real.cols());
    rho.real() = c.rho_i_real;
    rho.imag() = c.rho_i_imag;
    if (c.weights.size() != c.eigenvalues.size())
        throw PhysicsError("config: weights length must match the system dimension");
    return Model{std::move(sys), core::DensityMatrix(rho),
                 core::PostselectionScheme(c.weights), probe, std::move(profile),
                 std::move(dispersion), deco, grid};
}

// Measured oscillation period from the coherent residual Q - Q_diag
// (median local-maxima spacing); NaN when fewer than three maxima stand out.
double measure_period(const Model& md, const exact_stats::ReadoutDistribution& dist) {
    const auto diag = exact_stats::conditional_distribution(
        md.sys, md.rho_i, md.scheme, md.probe, md.profile, md.dispersion, md.deco, md.grid,
        exact_stats::Parts::Diagonal);
    // rescale the diagonal part to the full P_post before subtracting
    const double scale = diag.p_post() / dist.p_post();
    std::vector<double> residual(dist.grid().n);
    for (std::size_t i = 0; i < residual.size(); ++i)
        residual[i] = dist.values()[i] - diag.values()[i] * scale;
    double rmax = 0.0;
    for (double r : residual) rmax = std::max(rmax, std::fabs(r));
    std::vector<double> maxima;
    for (std::size_t i = 1; i + 1 < residual.size(); ++i)
        if (residual[i] >= residual[i - 1] && residual[i] > residual[i + 1]
            && residual[i] > 1e-3 * rmax)
            maxima.push_back(dist.grid()[i]);
    if (maxima.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> spacing(maxima.size() - 1);
    for (std::size_t i = 0; i + 1 < maxima.size(); ++i) spacing[i] = maxima[i + 1] - maxima[i];
    std::nth_element(spacing.begin(), spacing.begin() + spacing.size() / 2, spacing.end());
    return spacing[spacing.size() / 2];
}

// ----------------------------------- run -----------------------------------

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::string& format) {
    const RunConfig cfg = RunConfig::from_file(config_path);
    const Model md = build_model(cfg);
    fs::create_directories(out_dir);
    const fs::path base = fs::path(out_dir) / cfg.stem;
    std::vector<std::string> written;

    const bool want_exact = cfg.quantities.count("Q_exact");
    const bool want_interp = cfg.quantities.count("Q_interp") || cfg.quantities.count("Z")
                           || cfg.quantities.count("Zx") || cfg.quantities.count("moments");
    const bool want_osc = cfg.quantities.count("Q_osc");

    std::optional<exact_stats::ReadoutDistribution> exact;
    if (want_exact || cfg.quantities.count("moments") || cfg.quantities.count("Z")
        || cfg.quantities.count("P_post") || want_osc) {
        exact = exact_stats::conditional_distribution(md.sys, md.rho_i, md.scheme, md.probe,
                                                      md.profile, md.dispersion, md.deco, md.grid);
    }
    std::optional<expansion::ExpansionContext> ctx;
    if (want_interp || want_osc)
        ctx = expansion::make_context(md.sys, md.rho_i, md.scheme, md.probe, md.profile,
                                      md.dispersion, md.grid);
    std::optional<exact_stats::ReadoutDistribution> interp, osc;
    if (cfg.quantities.count("Q_interp") || cfg.quantities.count("moments"))
        interp = expansion::interpolating_distribution(*ctx, md.grid);
    if (want_osc) osc = expansion::oscillation_distribution(*ctx, md.grid);

    if (want_exact || interp || osc) {
        std::vector<std::string> header{"k"};
        if (want_exact) header.push_back("Q_exact");
        if (cfg.quantities.count("Q_interp")) header.push_back("Q_interp");
        if (want_osc) header.push_back("Q_osc");
        CsvWriter w(base.string() + "_curves.csv", header);
        for (std::size_t i = 0; i < md.grid.n; ++i) {
            std::vector<double> row{md.grid[i]};
            if (want_exact) row.push_back(exact->values()[i]);
            if (cfg.quantities.count("Q_interp")) row.push_back(interp->values()[i]);
            if (want_osc) row.push_back(osc->values()[i]);
            w.row(row);
        }
        written.push_back(w.path().string());
    }

    if (cfg.quantities.count("Z")) {
        CsvWriter w(base.string() + "_zk.csv",
                    {"theta", "Z_exact_re", "Z_exact_im", "Z_interp_re", "Z_interp_im"});
        for (std::size_t i = 0; i < cfg.n_theta; ++i) {
            const double th = -cfg.theta_max
                            + 2.0 * cfg.theta_max * static_cast<double>(i)
                                  / static_cast<double>(cfg.n_theta - 1);
            const auto ze = exact_stats::exact_characteristic_function(*exact, th);
            const auto zi = expansion::characteristic_function_k(*ctx, th);
            w.row({th, ze.real(), ze.imag(), zi.real(), zi.imag()});
        }
        written.push_back(w.path().string());
    }

    if (cfg.quantities.count("Zx")) {
        CsvWriter w(base.string() + "_zx.csv", {"chi", "Zx_re", "Zx_im"});
        for (std::size_t i = 0; i < cfg.n_chi; ++i) {
            const double chi = -cfg.chi_max
                             + 2.0 * cfg.chi_max * static_cast<double>(i)
                                   / static_cast<double>(cfg.n_chi - 1);
            const auto z = expansion::characteristic_function_x(*ctx, chi);
            w.row({chi, z.real(), z.imag()});
        }
        written.push_back(w.path().string());
    }

    if (cfg.quantities.count("moments")) {
        CsvWriter w(base.string() + "_moments.csv", {"n", "moment_exact", "moment_interp"});
        const auto me = exact_stats::distribution_moments(*exact, 4);
        const auto mi = exact_stats::distribution_moments(*interp, 4);
        for (unsigned n = 0; n <= 4; ++n)
            w.row({static_cast<double>(n), me[n], mi[n]});
        written.push_back(w.path().string());
    }

    {
        CsvWriter w(base.string() + "_scalars.csv", {"name", "value"});
        w.row_strings({"W", fmt(md.scheme.total_weight())});
        if (exact) w.row_strings({"P_post", fmt(exact->p_post())});
        if (ctx)
            w.row_strings({"P_post_expanded",
                           fmt(expansion::p_post_expanded(*ctx) * md.scheme.total_weight())});
        if (md.dispersion.is_quadratic()) {
            const double kH2 = *md.dispersion.quadratic_mass / md.profile.tau_n(0);
            const double k_osc = M_PI * kH2 / std::max(cfg.lambda, 1e-300);
            w.row_strings({"k_osc_predicted", fmt(k_osc)});
            if (exact && k_osc <= cfg.delta_k) {
                const double period = measure_period(md, *exact);
                w.row_strings({"oscillation_period_measured", fmt(period)});
            }
        }
        written.push_back(w.path().string());
    }

    if (format == "json") {
        json meta;
        meta["version"] = kVersion;
        meta["config"] = cfg.resolved();
        meta["files"] = written;
        std::ofstream js(base.string() + "_meta.json", std::ios::binary);
        js << meta.dump(2) << '\n';
        written.push_back(base.string() + "_meta.json");
    }

    for (const auto& f : written) std::cout << "wrote " << f << '\n';
    return 0;
}

// ---------------------------------- sweep -----------------------------------

struct SweepRow {
    double value, p_post, mean_exact, mean_interp, max_dev;
};

SweepRow sweep_point(RunConfig cfg, const std::string& param, double value) {
    if (param == "lambda") cfg.lambda = value;
    else if (param == "kappa_k") cfg.kappa_k = value;
    else if (param == "k_H") { cfg.k_H = value; cfg.mass.reset(); }
    else if (param == "K_D") cfg.K_D = value;
    else if (param == "angle") {
        if (cfg.scenario != RunConfig::Scenario::SpinHalf)
            throw cli::ParseError("sweep: 'angle' applies to the spin-half scenario only");
        const double m_angle = std::atan2(cfg.m.head<2>().norm(), cfg.m.z());
        const double len = cfg.n.norm() > 0.0 ? cfg.n.norm() : 1.0;
        cfg.n = len * Eigen::Vector3d(std::sin(m_angle + value), 0.0, std::cos(m_angle + value));
    } else {
        throw cli::ParseError("sweep: unknown parameter '" + param
                              + "' (expected lambda, kappa_k, k_H, K_D or angle)");
    }
    cfg.validate();
    const Model md = build_model(cfg);
    const auto exact = exact_stats::conditional_distribution(md.sys, md.rho_i, md.scheme, md.probe,
                                                             md.profile, md.dispersion, md.deco,
                                                             md.grid);
    auto ctx = expansion::make_context(md.sys, md.rho_i, md.scheme, md.probe, md.profile,
                                       md.dispersion, md.grid);
    const auto interp = expansion::interpolating_distribution(ctx, md.grid);
    double dev = 0.0;
    for (std::size_t i = 0; i < md.grid.n; ++i)
        dev = std::max(dev, std::fabs(exact.values()[i] - interp.values()[i]));
    return SweepRow{value, exact.p_post(), exact.moment(1), interp.moment(1), dev};
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              const std::string& param, const std::vector<double>& values, unsigned threads) {
    if (values.empty()) throw cli::ParseError("sweep: empty value list");
    const RunConfig cfg = RunConfig::from_file(config_path);
    std::vector<SweepRow> rows(values.size());
    std::vector<std::exception_ptr> errors(values.size());

    const unsigned nthreads = std::max(1u, std::min<unsigned>(threads,
                                                              static_cast<unsigned>(values.size())));
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (unsigned t = 0; t < nthreads; ++t) {
        pool.emplace_back([&]() {
            for (std::size_t i = next.fetch_add(1); i < values.size(); i = next.fetch_add(1)) {
                try {
                    rows[i] = sweep_point(cfg, param, values[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    fs::create_directories(out_dir);
    const fs::path out = fs::path(out_dir) / (cfg.stem + "_sweep_" + param + ".csv");
    CsvWriter w(out, {param, "P_post", "mean_k_exact", "mean_k_interp", "max_abs_dev"});
    for (const auto& r : rows) w.row({r.value, r.p_post, r.mean_exact, r.mean_interp, r.max_dev});
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

// ---------------------------------- verify ----------------------------------

int cmd_verify(unsigned n_configs) {
    const auto results = verify::run_battery(n_configs);
    bool all = true;
    for (const auto& r : results) {
        std::cout << verify::format_result(r) << '\n';
        all = all && r.pass;
    }
    std::cout << (all ? "verify: all checks passed" : "verify: FAILURES present") << '\n';
    return all ? 0 : 4;
}

unsigned resolve_threads(int cli_value) {
    long v = cli_value;
    if (v < 0) { // not set on the command line: environment fallback
        if (const char* env = std::getenv("NDWEAK_THREADS")) v = std::strtol(env, nullptr, 10);
        else v = 1;
    }
    if (v == 0) {
        const unsigned hc = std::thread::hardware_concurrency();
        return hc > 0 ? hc : 1;
    }
    return static_cast<unsigned>(std::max(1l, v));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Readout statistics of finite-duration nondemolition weak measurements"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", format = "csv", param;
    std::string values_text;
    int threads = -1;
    unsigned n_configs = 100;

    auto* run = app.add_subcommand("run", "compute the configured quantities and write tables");
    run->add_option("--config", config_path, "configuration file")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--format", format, "csv | json (json adds a metadata sidecar)")
        ->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--threads", threads, "worker threads (0 = auto)");

    auto* sweep = app.add_subcommand("sweep", "repeat a run over a list of parameter values");
    sweep->add_option("--config", config_path, "configuration file")->required();
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--param", param, "lambda | kappa_k | k_H | K_D | angle")->required();
    sweep->add_option("--values", values_text, "comma-separated parameter values")->required();
    sweep->add_option("--threads", threads, "worker threads (0 = auto)");

    auto* verify_cmd = app.add_subcommand("verify", "run the oracle battery and report pass/fail");
    verify_cmd->add_option("--configs", n_configs, "number of random cross-oracle configurations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(run)) return cmd_run(config_path, out_dir, format);
        if (app.got_subcommand(sweep)) {
            std::vector<double> values;
            std::istringstream is(values_text);
            std::string tok;
            while (std::getline(is, tok, ',')) {
                if (tok.empty()) continue;
                try {
                    std::size_t pos = 0;
                    values.push_back(std::stod(tok, &pos));
                    if (pos != tok.size()) throw std::invalid_argument(tok);
                } catch (const std::exception&) {
                    throw cli::ParseError("sweep: cannot parse value '" + tok + "'");
                }
            }
            return cmd_sweep(config_path, out_dir, param, values, resolve_threads(threads));
        }
        if (app.got_subcommand(verify_cmd)) return cmd_verify(n_configs);
    } catch (const cli::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const PhysicsError& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return 3;
    } catch (const ConsistencyError& e) {
        std::cerr << "numerical consistency failure: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
