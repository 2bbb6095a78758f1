// levyruin: command-line front end for the ruin estimators.
//
// Options live on the top-level app and fall through to subcommands, so a
// flat key=value config file (--config) sets the same keys as the flags.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "levyruin/asymptotics.hpp"
#include "levyruin/conditioned.hpp"
#include "levyruin/errors.hpp"
#include "levyruin/fluctuation.hpp"
#include "levyruin/path_sim.hpp"
#include "levyruin/validation.hpp"

using namespace levyruin;

namespace {

constexpr int kExitDomain = 2;
constexpr int kExitBudget = 3;
constexpr int kExitValidation = 4;

double parse_double(const std::string& s) {
    if (s == "inf" || s == "infinity") return kInfiniteHorizon;
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw ConfigError("not a number: '" + s + "'");
    return v;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(parse_double(item));
    return out;
}

ClaimDistribution parse_claims(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw ConfigError("claims must look like exp:ETA or tpareto:ALPHA,THETA,SIGMA");
    const std::string family = spec.substr(0, colon);
    const std::vector<double> args = parse_list(spec.substr(colon + 1));
    if (family == "exp" && args.size() == 1) return Exponential{args[0]};
    if (family == "tpareto" && args.size() == 3) return TiltedPareto{args[0], args[1], args[2]};
    throw ConfigError("unknown claim spec '" + spec + "'");
}

std::string num(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

using Cell = std::variant<std::monostate, double, std::string, bool>;

// CSV writer with an optional line-delimited JSON mirror.
class Table {
public:
    Table(std::ostream& csv, std::ostream* jsonl, std::vector<std::string> header)
        : csv_(csv), jsonl_(jsonl), header_(std::move(header)) {
        for (std::size_t i = 0; i < header_.size(); ++i) csv_ << (i ? "," : "") << header_[i];
        csv_ << "\n";
    }

    void row(const std::vector<Cell>& cells) {
        nlohmann::ordered_json j;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) csv_ << ",";
            const Cell& c = cells[i];
            if (auto d = std::get_if<double>(&c)) {
                csv_ << num(*d);
                j[header_[i]] = std::isfinite(*d) ? nlohmann::ordered_json(*d) : nlohmann::ordered_json(num(*d));
            } else if (auto s = std::get_if<std::string>(&c)) {
                csv_ << (s->find(',') != std::string::npos ? "\"" + *s + "\"" : *s);
                j[header_[i]] = *s;
            } else if (auto b = std::get_if<bool>(&c)) {
                csv_ << (*b ? "true" : "false");
                j[header_[i]] = *b;
            } else {
                j[header_[i]] = nullptr;
            }
        }
        csv_ << "\n";
        if (jsonl_) *jsonl_ << j.dump() << "\n";
    }

private:
    std::ostream& csv_;
    std::ostream* jsonl_;
    std::vector<std::string> header_;
};

struct Config {
    std::string claims = "exp:1";
    double lambda = 1.0;
    double premium = 2.0;
    double alpha = 0.5;
    std::string horizon = "1";
    std::string level;
    std::string level_grid;
    std::string beta;
    std::string delta = "1";
    std::uint64_t replicas = 100000;
    std::uint64_t grid_replicas = 100000;
    std::uint64_t reference_replicas = 1000000;
    std::uint64_t seed = 20240601;
    std::string method;
    unsigned threads = 1;
    int intervals = 64;
    std::string grid_cache;
    std::string out;
    std::string jsonl;
    std::string criteria;
    bool inject_fault = false;

    RiskModel model() const {
        RiskModel m{lambda, premium, parse_claims(claims)};
        validate(m);
        return m;
    }
    McOptions mc() const { return McOptions{replicas, seed, threads}; }
    double T() const { return parse_double(horizon); }
    std::vector<double> levels(std::vector<double> fallback) const {
        if (!level_grid.empty()) return parse_list(level_grid);
        if (!level.empty()) return {parse_double(level)};
        return fallback;
    }
};

// Output streams chosen by --out / --jsonl.
struct Sinks {
    std::ofstream file, mirror;
    std::ostream* csv = &std::cout;
    std::ostream* jsonl = nullptr;

    explicit Sinks(const Config& c) {
        if (!c.out.empty()) {
            file.open(c.out, std::ios::trunc);
            if (!file) throw ConfigError("cannot write " + c.out);
            csv = &file;
        }
        if (!c.jsonl.empty()) {
            mirror.open(c.jsonl, std::ios::trunc);
            if (!mirror) throw ConfigError("cannot write " + c.jsonl);
            jsonl = &mirror;
        }
    }
};

void log(const std::string& msg) { std::cerr << "levyruin: " << msg << "\n"; }

// ------------------------------------------------------------------ psi

int cmd_psi(const Config& c) {
    const RiskModel m = c.model();
    std::vector<double> betas = parse_list(c.beta);
    if (betas.empty()) {
        const double top = std::min(mgf_abscissa(m.claims), 4.0);
        for (int k = 0; k <= 10; ++k) betas.push_back(top * k / 10.0);
        if (!mgf_abscissa_attained(m.claims)) betas.back() = std::nextafter(top, 0.0);
    }
    Sinks s(c);
    Table t(*s.csv, s.jsonl, {"beta", "psi", "regime"});
    for (double b : betas) {
        const CumulantInfo info = cumulant_info(m, b);
        t.row({b, info.psi, std::string(to_string(info.regime))});
    }
    const auto nu = lundberg_root(m);
    log("lundberg root: " + (nu ? num(*nu) : std::string("none (no root in the MGF domain)")));
    if (m.premium > 0.0)
        for (double d : parse_list(c.delta)) log("phi(" + num(d) + ") = " + num(phi_inverse(m, d)));
    return 0;
}

// ------------------------------------------------------------------ estimate-b

BMethod parse_method(const std::string& s) {
    if (s == "quadrature") return BMethod::quadrature;
    if (s == "exp-time") return BMethod::exp_time;
    if (s == "laplace") return BMethod::laplace;
    throw ConfigError("unknown B method '" + s + "' (quadrature, exp-time, laplace)");
}

int cmd_estimate_b(const Config& c) {
    const RiskModel m = c.model();
    const double T = c.T();
    std::vector<BMethod> methods;
    std::stringstream ss(c.method.empty() ? "quadrature,exp-time,laplace" : c.method);
    for (std::string item; std::getline(ss, item, ',');) methods.push_back(parse_method(item));
    std::vector<BEstimate> rows;
    for (BMethod k : methods) {
        switch (k) {
            case BMethod::quadrature: rows.push_back(b_quadrature(m, c.alpha, T, c.intervals, c.mc())); break;
            case BMethod::exp_time: rows.push_back(b_exp_time(m, c.alpha, T, c.mc(), c.intervals)); break;
            case BMethod::laplace: rows.push_back(b_laplace(m, c.alpha, T)); break;
        }
    }
    Sinks s(c);
    Table t(*s.csv, s.jsonl, {"method", "T", "alpha", "value", "std_error", "seed", "consistent"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        bool ok = true;
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (i == j) continue;
            const double allowed = std::max(3.0 * std::hypot(rows[i].std_error, rows[j].std_error),
                                            0.005 * std::abs(rows[j].value));
            ok = ok && std::abs(rows[i].value - rows[j].value) <= allowed;
        }
        const BEstimate& b = rows[i];
        t.row({std::string(to_string(b.method)), b.T, b.alpha, b.value, b.std_error, static_cast<double>(b.seed), ok});
        if (!b.flags.empty()) log(std::string(to_string(methods[i])) + ": " + b.flags);
    }
    return 0;
}

// ------------------------------------------------------------------ ruin

int cmd_ruin(const Config& c) {
    const RiskModel m = c.model();
    const double T = c.T();
    const std::vector<double> us = c.levels({2.0, 4.0, 6.0, 8.0});
    const std::string method = c.method.empty() ? "esscher" : c.method;
    ImportanceSampling is;
    if (method == "esscher") is = ImportanceSampling::esscher(c.alpha);
    else if (method != "direct") throw ConfigError("ruin method must be esscher or direct");

    // B(T), or its T = inf limit.
    std::optional<double> b;
    std::string b_reason;
    const double psi = cumulant(m, c.alpha);
    if (std::isinf(T)) {
        if (psi < 0.0 && m.premium > 0.0) b = infinite_horizon_constant(m, c.alpha);
        else b_reason = "psi(alpha) >= 0: B(inf) is infinite";
    } else if (m.premium >= 0.0) {
        b = b_laplace(m, c.alpha, T).value;
    } else {
        b = b_quadrature(m, c.alpha, T, c.intervals, c.mc()).value;
    }
    if (b && !is_convolution_equivalent(m.claims))
        b_reason = "claims not convolution equivalent: asymptotic not justified";

    const auto consts = segerdahl_constants(m);
    Sinks s(c);
    Table t(*s.csv, s.jsonl,
            {"u", "T", "mc", "mc_se", "method", "pibar_b", "pibar_b_reason", "ratio", "ratio_se", "segerdahl",
             "segerdahl_reason", "cramer_lundberg", "cramer_lundberg_reason"});
    for (double u : us) {
        const MCEstimate e = estimate_ruin_prob(m, u, T, c.mc(), is);
        if (!e.flags.empty()) log("u = " + num(u) + ": " + e.flags);
        Cell pb, ratio, ratio_se, seg, cl;
        if (b) {
            const double v = levy_tail(m, u) * *b;
            pb = v;
            ratio = e.estimate / v;
            ratio_se = e.std_error / v;
        }
        std::string seg_reason, cl_reason;
        if (consts) {
            seg = *segerdahl(m, u, T);
            cl = consts->C * std::exp(-consts->nu * u);
        } else {
            seg_reason = cl_reason = "no Lundberg root";
        }
        t.row({u, T, e.estimate, e.std_error, e.method, pb, b_reason, ratio, ratio_se, seg, seg_reason, cl,
               cl_reason});
    }
    return 0;
}

// ------------------------------------------------------------------ conditioned

int cmd_conditioned(const Config& c) {
    const RiskModel m = c.model();
    const double T = c.T();
    if (std::isinf(T)) throw DomainError("the conditioned sampler needs a finite horizon");
    const double alpha = c.alpha;
    const McOptions grid_opts{c.grid_replicas, c.seed, c.threads};

    PassageGrid grid;
    bool loaded = false;
    if (!c.grid_cache.empty() && std::filesystem::exists(c.grid_cache)) {
        try {
            grid = PassageGrid::load(c.grid_cache);
            grid.check_matches(m, alpha, T);
            if (grid.seed != grid_opts.seed || grid.replicas != grid_opts.replicas)
                throw GridError("seed or replica count differs");
            loaded = true;
            log("grid cache hit: loaded " + c.grid_cache + ", grid build skipped");
        } catch (const GridError& e) {
            log(std::string("grid cache unusable (") + e.what() + "), rebuilding");
        }
    }
    if (!loaded) {
        grid = build_passage_grid(m, alpha, T, PassageGridSpec{}, grid_opts);
        if (!c.grid_cache.empty()) {
            grid.save(c.grid_cache);
            log("grid cache miss: built and saved " + c.grid_cache);
        }
    }

    const auto triples = sample_limit_triples(m, alpha, T, grid, c.mc());
    Sinks s(c);
    {
        Table t(*s.csv, s.jsonl, {"tau", "tau0", "overshoot", "prejump", "w0"});
        for (const auto& x : triples) t.row({x.tau, x.tau0, x.overshoot, x.prejump, x.w0});
    }

    // Summary block.
    const double psi = grid.psi;
    WeightedSample tau_law, over;
    std::vector<double> times;
    std::uint64_t positive = 0;
    for (std::uint64_t i = 0; i < triples.size(); ++i) {
        RandomStream st(c.seed, StreamTag::generic, i);
        tau_law.add(sample_tau(psi, T, st));
        times.push_back(triples[i].passage_time());
        over.add(triples[i].overshoot);
        positive += triples[i].w0 > 0.0;
    }
    std::sort(times.begin(), times.end());
    const double bT = b_laplace(m, alpha, T).value;
    double gap = 0.0;
    for (int k = 1; k <= 40; ++k) {
        const double t = T * k / 40.0;
        const double ecdf = double(std::upper_bound(times.begin(), times.end(), t) - times.begin()) / times.size();
        gap = std::max(gap, std::abs(ecdf - b_laplace(m, alpha, t).value / bT));
    }
    const double u = c.level.empty() ? 8.0 : parse_double(c.level);
    const ConditionalSample ref =
        conditional_mc_reference(m, alpha, u, T, McOptions{c.reference_replicas, c.seed + 1, c.threads});
    const double mu_T = psi == 0.0 ? T : std::expm1(psi * T) / psi;

    // Rows went to stdout unless --out was given; keep the summary separate.
    if (c.out.empty()) std::cout << "\n";
    Table summary(std::cout, nullptr, {"statistic", "value"});
    summary.row({std::string("ks_tau_vs_law"), ks_statistic(tau_law, [&](double t) { return tau_cdf(psi, T, t); })});
    summary.row({std::string("ks_time_vs_B_ratio"), gap});
    summary.row({std::string("ks_overshoot_vs_reference"), ks_two_sample(over, ref.overshoot)});
    summary.row({std::string("reference_level"), u});
    summary.row({std::string("reference_effective_size"), ref.overshoot.effective_size()});
    summary.row({std::string("p_w0_positive"), double(positive) / triples.size()});
    summary.row({std::string("p_w0_positive_predicted"), mu_T / bT});
    summary.row({std::string("grid_truncation_ratio"), grid.truncation_ratio()});
    return 0;
}

// ------------------------------------------------------------------ validate

int cmd_validate(const Config& c) {
    ValidationOptions o;
    o.seed = c.seed;
    o.threads = c.threads;
    o.inject_fault = c.inject_fault;
    std::vector<int> ids;
    for (double d : parse_list(c.criteria)) ids.push_back(static_cast<int>(d));
    const auto results = run_validation(o, ids, [](const CriterionResult& r) { std::cerr << format_result(r) << "\n"; });
    bool all = true;
    nlohmann::ordered_json report;
    report["seed"] = c.seed;
    report["inject_fault"] = c.inject_fault;
    report["results"] = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        all = all && r.pass;
        auto j = nlohmann::ordered_json::parse(to_json(r));
        j.erase("seconds");
        report["results"].push_back(j);
    }
    report["pass"] = all;
    Sinks s(c);
    *s.csv << report.dump(2) << "\n";
    if (s.jsonl)
        for (const auto& r : results) *s.jsonl << to_json(r) << "\n";
    return all ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ruin probabilities and conditioned passage laws for Cramer-Lundberg models"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key=value configuration file");
    Config c;
    app.add_option("--claims", c.claims, "exp:ETA or tpareto:ALPHA,THETA,SIGMA");
    app.add_option("--lambda", c.lambda, "Claim arrival rate");
    app.add_option("--premium", c.premium, "Premium rate p");
    app.add_option("--alpha", c.alpha, "Tilt index alpha");
    app.add_option("--horizon", c.horizon, "Horizon T (number or inf)");
    app.add_option("--level", c.level, "Level u");
    app.add_option("--level-grid", c.level_grid, "Comma-separated levels");
    app.add_option("--beta", c.beta, "Comma-separated beta values for psi");
    app.add_option("--delta", c.delta, "Comma-separated delta values for phi");
    app.add_option("--replicas", c.replicas, "Monte Carlo replicas (or draws)");
    app.add_option("--grid-replicas", c.grid_replicas, "Replicas for the passage grid");
    app.add_option("--reference-replicas", c.reference_replicas, "Replicas for the conditional reference");
    app.add_option("--seed", c.seed, "Master seed");
    app.add_option("--method", c.method, "Method selector");
    app.add_option("--threads", c.threads, "Worker cap (results do not depend on it)");
    app.add_option("--intervals", c.intervals, "Simpson intervals for B quadrature");
    app.add_option("--grid-cache", c.grid_cache, "Passage grid cache file");
    app.add_option("--out", c.out, "Output file (default stdout)");
    app.add_option("--jsonl", c.jsonl, "Line-delimited JSON mirror of the table");
    app.add_option("--criteria", c.criteria, "Comma-separated criterion ids for validate");
    app.add_flag("--inject-fault", c.inject_fault, "Perturb the Vigon check by 1%");

    int (*handler)(const Config&) = nullptr;
    auto sub = [&](const char* name, const char* help, int (*fn)(const Config&)) {
        app.add_subcommand(name, help)->fallthrough()->callback([&handler, fn] { handler = fn; });
    };
    sub("psi", "Cumulant table with regime labels", cmd_psi);
    sub("estimate-b", "B(T) by quadrature, exponential time and Laplace inversion", cmd_estimate_b);
    sub("ruin", "Finite-time ruin probability with approximations", cmd_ruin);
    sub("conditioned", "Sample the limiting conditioned passage triple", cmd_conditioned);
    sub("validate", "Run the acceptance matrix", cmd_validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitDomain;
    }
    try {
        return handler(c);
    } catch (const BudgetError& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const NoHitsError& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const RegimeError& e) {
        std::cerr << "regime error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}
