// hord: exact Hecke eigenvalues of level-1 forms, ordered-run construction,
// sieve diagnostics. One subcommand per run; JSON on stdout, logs on stderr.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hord/construct.hpp"
#include "hord/forms.hpp"
#include "hord/parallel.hpp"
#include "hord/primes.hpp"
#include "hord/satotate.hpp"
#include "hord/sieve.hpp"
#include "hord/table_io.hpp"

using nlohmann::json;
using namespace hord;

namespace {

struct RunConfig {
    std::string cache_dir;
    unsigned workers = default_workers();
    unsigned precision_bits = kDefaultPrecisionBits;
    uint64_t seed = 1;
    bool json_only = false;
    bool no_cache = false;
};

std::string default_cache_dir() {
    if (const char* env = std::getenv("HORD_CACHE")) return env;
    if (const char* home = std::getenv("HOME")) return std::string(home) + "/.cache/hord";
    return ".hord-cache";
}

unsigned weight_for_label(std::string label) {
    for (auto& c : label) c = (char)std::tolower((unsigned char)c);
    // UTF-8 capital delta
    const std::string delta = "\xce\x94";
    if (label.rfind(delta, 0) == 0) label = "delta" + label.substr(delta.size());
    if (label == "delta" || label == "tau" || label == "delta12") return 12;
    if (label.rfind("delta", 0) == 0) {
        unsigned w = (unsigned)std::stoul(label.substr(5));
        if (forms::is_builtin_weight(w)) return w;
    }
    throw CLI::ValidationError("form", "unknown form label '" + label + "' (builtins: delta, "
                                       "delta16, delta18, delta20, delta22, delta26)");
}

forms::CoefficientTable get_table(const std::string& label, uint64_t n_max,
                                  const RunConfig& cfg) {
    unsigned weight = weight_for_label(label);
    std::string canonical = weight == 12 ? "delta" : "delta" + std::to_string(weight);
    if (!cfg.no_cache) {
        if (auto cached = io::load_cached(cfg.cache_dir, canonical, weight, 1, n_max)) {
            std::cerr << "[hord] " << canonical << ": cache hit (n_max " << n_max << ")\n";
            return std::move(*cached);
        }
    }
    std::cerr << "[hord] building " << canonical << " table to " << n_max << "...\n";
    auto table = weight == 12 ? forms::build_delta_table(n_max, cfg.workers)
                              : forms::build_eigenform_table(weight, n_max, cfg.workers);
    if (!cfg.no_cache) {
        try {
            io::store_cached(cfg.cache_dir, table);
        } catch (const std::exception& e) {
            std::cerr << "[hord] cache write failed: " << e.what() << "\n";
        }
    }
    return table;
}

std::vector<uint64_t> parse_list(const std::string& csv) {
    std::vector<uint64_t> out;
    std::istringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_count(tok));
    return out;
}

sieve::LinearSystem parse_system(const std::string& arg) {
    std::string text = arg;
    if (!arg.empty() && arg[0] != '{') {
        std::ifstream in(arg);
        if (!in) throw CLI::ValidationError("system", "cannot open " + arg);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    json j = json::parse(text);
    sieve::LinearSystem sys;
    for (auto& f : j.at("forms")) {
        Int a, b;
        if (f.at(0).is_string()) a.set_str(f.at(0).get<std::string>(), 10);
        else a = Int((long)f.at(0).get<int64_t>());
        if (f.at(1).is_string()) b.set_str(f.at(1).get<std::string>(), 10);
        else b = Int((long)f.at(1).get<int64_t>());
        sys.forms.push_back({a, b});
    }
    for (auto& p : j.value("sigma", json::array())) sys.sigma.push_back(p.get<uint64_t>());
    std::sort(sys.sigma.begin(), sys.sigma.end());
    return sys;
}

json hit_to_json(const construct::Hit& h) {
    json e;
    e["m"] = h.m.get_str();
    e["n"] = h.n;
    auto& chain = e["chain"] = json::array();
    for (size_t i = 0; i < h.chain.size(); ++i) {
        json c;
        c["i"] = i + 1;
        c["shift"] = h.chain[i].shift;
        c["abs_a"] = h.chain[i].abs_a.get_str();
        c["lambda"] = h.chain[i].lambda;
        chain.push_back(std::move(c));
    }
    e["verified"] = h.verified;
    return e;
}

int cmd_tau(const RunConfig& cfg, uint64_t n) {
    auto table = get_table("delta", std::max<uint64_t>(n, 1024), cfg);
    if (cfg.json_only) {
        json j{{"n", n}, {"tau", table.at(n).get_str()}};
        std::cout << j.dump() << "\n";
    } else {
        std::cout << table.at(n).get_str() << "\n";
    }
    return 0;
}

int cmd_expand(const RunConfig& cfg, const std::string& label, uint64_t n_max,
               const std::string& out_path) {
    auto table = get_table(label, n_max, cfg);
    if (out_path.empty()) {
        const auto& f = table.form();
        std::cout << "#form label=" << f.label << " weight=" << f.weight
                  << " level=" << f.level << " nmax=" << table.n_max() << "\n";
        for (uint64_t n = 1; n <= table.n_max(); ++n)
            std::cout << n << '\t' << table.at(n).get_str() << '\n';
    } else {
        io::write_text(table, out_path);
        std::cerr << "[hord] wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_ingest(const std::string& path) {
    try {
        auto table = io::ingest_table(path);
        json j{{"ok", true},
               {"label", table.form().label},
               {"weight", table.form().weight},
               {"level", table.form().level},
               {"nmax", table.n_max()}};
        std::cout << j.dump() << "\n";
        return 0;
    } catch (const InvariantViolation& e) {
        json j{{"ok", false}, {"error", e.what()}};
        std::cout << j.dump() << "\n";
        std::cerr << "[hord] " << e.what() << "\n";
        return 1;
    }
}

int cmd_lehmer(const RunConfig& cfg, uint64_t n_max) {
    auto table = get_table("delta", n_max, cfg);
    json zeros = json::array();
    for (uint64_t n = 1; n <= n_max; ++n)
        if (sgn(table.at(n)) == 0) zeros.push_back(n);
    json j{{"nmax", n_max}, {"zeros", zeros}, {"ok", zeros.empty()}};
    std::cout << j.dump() << "\n";
    std::cerr << (zeros.empty() ? "[hord] no zeros found\n" : "[hord] ZERO FOUND\n");
    return zeros.empty() ? 0 : 1;
}

int cmd_scan(const RunConfig& cfg, const std::string& label, uint64_t k,
             const std::string& perm_csv, const std::string& shifts_csv, uint64_t m_max,
             bool lambda_mode, uint64_t max_hits) {
    std::vector<uint64_t> shifts;
    if (!shifts_csv.empty()) {
        shifts = parse_list(shifts_csv);
    } else {
        std::vector<uint64_t> perm(k);
        for (uint64_t i = 0; i < k; ++i) perm[i] = i + 1;
        if (!perm_csv.empty()) {
            perm = parse_list(perm_csv);
            if (perm.size() != k) throw CLI::ValidationError("perm", "length != k");
        }
        shifts = perm;
    }
    auto table = get_table(label, m_max + *std::max_element(shifts.begin(), shifts.end()), cfg);
    construct::TargetSpec spec;
    for (size_t i = 0; i < shifts.size(); ++i) spec.tables.push_back(&table);
    spec.shifts = shifts;
    spec.mode = lambda_mode ? construct::CompareMode::NormalizedLambda
                            : construct::CompareMode::RawCoefficient;
    auto rep = construct::scan_bruteforce(spec, m_max, max_hits);
    json j;
    j["mmax"] = rep.m_max;
    j["shifts"] = shifts;
    j["hit_count"] = rep.hit_count;
    if (rep.first_hit) j["first_hit"] = *rep.first_hit;
    auto& cps = j["checkpoints"] = json::array();
    for (auto& [x, c] : rep.checkpoints) cps.push_back(json{{"x", x}, {"hits", c}});
    auto& hits = j["hits"] = json::array();
    for (uint64_t m : rep.hits) hits.push_back(m);
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_construct(const RunConfig& cfg, const std::string& forms_csv,
                  const std::string& shifts_csv, const std::string& delta_str,
                  double eta, const std::string& eps_str, uint64_t x, uint64_t table_nmax,
                  bool lambda_mode, uint64_t max_hits) {
    std::vector<std::string> labels;
    {
        std::istringstream ss(forms_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) labels.push_back(tok);
    }
    auto shifts = parse_list(shifts_csv);
    if (labels.size() != shifts.size())
        throw CLI::ValidationError("forms", "need one form per shift");

    std::vector<forms::CoefficientTable> tables;
    tables.reserve(labels.size());
    for (auto& l : labels) tables.push_back(get_table(l, table_nmax, cfg));
    construct::TargetSpec spec;
    for (auto& t : tables) spec.tables.push_back(&t);
    spec.shifts = shifts;
    bool same_weight = spec.same_weight();
    spec.mode = lambda_mode || !same_weight ? construct::CompareMode::NormalizedLambda
                                            : construct::CompareMode::RawCoefficient;

    Rat delta = rat_from_decimal(delta_str);
    Rat eps = rat_from_decimal(eps_str);
    auto primes = construct::choose_primes(spec);
    auto exps = construct::choose_exponents(spec, primes, delta);
    auto pspec = construct::build_progression(spec, primes, exps, delta);
    std::cerr << "[hord] primes:";
    for (auto p : primes) std::cerr << " " << p;
    std::cerr << "; exponents:";
    for (auto e : exps) std::cerr << " " << e;
    std::cerr << "; A = " << pspec.A.get_str() << ", B = " << pspec.B.get_str() << "\n";

    auto rep = construct::run_ordered_search(spec, pspec, x, eta, eps, cfg.workers, max_hits);
    bool all_verified = true;
    for (auto& h : rep.hits) {
        std::cout << hit_to_json(h).dump() << "\n";
        all_verified = all_verified && h.verified;
    }
    json s;
    s["summary"] = {{"x", rep.x},
                    {"z", rep.z},
                    {"eta", rep.eta},
                    {"sifted", rep.sifted},
                    {"omega1", rep.omega1},
                    {"coverage_skipped", rep.coverage_skipped},
                    {"not_omega1", rep.not_omega1},
                    {"avoid_dropped", rep.avoid_dropped},
                    {"chain_failed", rep.chain_failed},
                    {"near_ties", rep.near_ties},
                    {"hits", rep.hits.size()},
                    {"hits_per_expected", rep.hits_per_expected},
                    {"A", pspec.A.get_str()},
                    {"B", pspec.B.get_str()}};
    std::cout << s.dump() << "\n";
    if (!all_verified) {
        std::cerr << "[hord] HIT RE-VERIFICATION FAILED\n";
        return 1;
    }
    return 0;
}

int cmd_sieve_stats(const RunConfig& cfg, const std::string& system_arg, uint64_t x,
                    uint64_t z, double eta, const std::string& dump_path) {
    auto sys = parse_system(system_arg);
    if (z == 0) {
        if (eta <= 0) throw CLI::ValidationError("z", "need --z or --eta");
        z = std::max<uint64_t>(2, (uint64_t)std::pow((double)x, eta));
    }
    auto rep = sieve::validate_system(sys, false);
    auto outcome = sieve::sift_omega(sys, x, z, cfg.workers);
    sieve::refine_omega1(outcome, cfg.workers, cfg.seed);
    auto w = sieve::mertens_products(sys, z);
    double wk = mpf_get_d(w.w_k.get_mpf_t());
    double wstar = mpf_get_d(w.w_star.get_mpf_t());
    outcome.predicted = (double)x * wk;

    json j;
    j["x"] = x;
    j["z"] = z;
    j["u"] = outcome.u;
    j["count_omega"] = outcome.count_omega;
    j["count_omega1"] = outcome.count_omega1;
    j["count_prime"] = outcome.count_prime;
    j["count_square"] = outcome.count_square;
    j["count_undecided"] = outcome.count_undecided;
    j["predicted_omega"] = outcome.predicted;
    j["omega_ratio"] = outcome.count_omega / std::max(outcome.predicted, 1e-300);
    j["w_k"] = wk;
    j["w_star"] = wstar;
    j["nonsquarefree_bound"] = sieve::nonsquarefree_bound(sys, (double)x, (double)z);
    j["valid"] = rep.ok(false);
    j["warnings"] = rep.warnings;
    j["failures"] = rep.failures;
    std::cout << j.dump() << "\n";
    if (!dump_path.empty()) {
        if (dump_path == "-") {
            sieve::dump_survivors(outcome, std::cout);
        } else {
            std::ofstream out(dump_path);
            sieve::dump_survivors(outcome, out);
            std::cerr << "[hord] wrote survivor dump to " << dump_path << "\n";
        }
    }
    return 0;
}

int cmd_satotate(const RunConfig& cfg, const std::string& label, uint64_t x_max, unsigned bins,
                 const std::string& eps_str, const std::string& hist_path) {
    auto table = get_table(label, x_max, cfg);
    auto sample = satotate::sample_angles(table, x_max, cfg.workers);
    Rat eps = rat_from_decimal(eps_str);
    double ks = satotate::empirical_discrepancy(sample);
    double density = satotate::small_lambda_density(table, x_max, eps);
    double e = mpz_get_d(eps.get_num().get_mpz_t()) / mpz_get_d(eps.get_den().get_mpz_t());
    double predicted = satotate::sato_tate_cdf(e) - satotate::sato_tate_cdf(-e);
    auto hist = satotate::histogram(sample, bins);

    std::ostringstream csv;
    csv << "bin_lo,bin_hi,count\n";
    for (unsigned b = 0; b < bins; ++b)
        csv << (-2.0 + 4.0 * b / bins) << ',' << (-2.0 + 4.0 * (b + 1) / bins) << ','
            << hist.bins[b] << "\n";

    json j{{"ks", ks},
           {"small_density", density},
           {"small_density_predicted", predicted},
           {"eps", e},
           {"zero_pm2_count", sample.zero_pm2_count},
           {"samples", sample.thetas.size()},
           {"xmax", x_max}};
    if (cfg.json_only) {
        std::vector<uint64_t> b(hist.bins.begin(), hist.bins.end());
        j["histogram"] = b;
        std::cout << j.dump() << "\n";
    } else if (hist_path.empty()) {
        std::cout << csv.str();
        std::cout << j.dump() << "\n";
    } else {
        std::ofstream out(hist_path);
        out << csv.str();
        std::cerr << "[hord] wrote histogram to " << hist_path << "\n";
        std::cout << j.dump() << "\n";
    }
    return 0;
}

int cmd_check_conditions(const RunConfig& cfg, const std::string& label, uint64_t k,
                         uint64_t n_max) {
    auto table = get_table(label, n_max, cfg);
    auto res = construct::check_order_conditions(table, k);
    json j;
    j["k"] = k;
    j["cond1"] = res.cond1;
    j["cond_prime_powers"] = res.cond_prime_powers;
    j["equivalent"] = res.cond1 == res.cond_prime_powers;
    switch (res.cond2) {
        case construct::Cond2::FoundWitness:
            j["cond2"] = {{"status", "witness"}, {"nu", res.cond2_witness}};
            break;
        case construct::Cond2::False:
            j["cond2"] = {{"status", "false"}};
            break;
        case construct::Cond2::Inconclusive:
            j["cond2"] = {{"status", "inconclusive"}};
            break;
    }
    std::cout << j.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hord: ordered runs of Hecke eigenvalues"};
    app.require_subcommand(1);

    RunConfig cfg;
    cfg.cache_dir = default_cache_dir();
    app.add_option("--cache-dir", cfg.cache_dir, "coefficient cache directory");
    app.add_option("--workers", cfg.workers, "worker thread count")->check(CLI::PositiveNumber);
    app.add_option("--precision", cfg.precision_bits, "float precision bits (>= 64)")
        ->check(CLI::Range(64u, 4096u));
    app.add_option("--seed", cfg.seed, "seed for randomized factorization");
    app.add_flag("--json", cfg.json_only, "JSON-only machine output");
    app.add_flag("--no-cache", cfg.no_cache, "skip the coefficient cache");

    std::string n_str, label = "delta", out_path, perm_csv, shifts_csv, forms_csv("delta");
    std::string delta_str = "0.25", eps_str = "0.2", system_arg, dump_path, hist_path, path;
    std::string mmax_str = "1000000", x_str = "100000", nmax_str = "1000", xmax_str = "1000000";
    std::string table_nmax_str = "1000000", z_str = "0";
    uint64_t k = 1, max_hits = 1000;
    unsigned bins = 64;
    double eta = 0.05;
    bool lambda_mode = false;

    auto* tau = app.add_subcommand("tau", "print tau(n)");
    tau->add_option("n", n_str, "index n >= 1")->required();

    auto* expand = app.add_subcommand("expand", "write a coefficient table in text format");
    expand->add_option("--form", label, "form label");
    expand->add_option("--nmax", nmax_str, "table size");
    expand->add_option("--out", out_path, "output path (stdout when omitted)");

    auto* ingest = app.add_subcommand("ingest", "load and verify an external table");
    ingest->add_option("path", path, "text-format table path")->required();

    auto* lehmer = app.add_subcommand("lehmer", "scan for vanishing tau(n)");
    lehmer->add_option("--nmax", nmax_str, "scan bound");

    auto* scan = app.add_subcommand("scan", "brute-force ordered-run scan");
    scan->add_option("--form", label, "form label");
    scan->add_option("--k", k, "chain length");
    scan->add_option("--perm", perm_csv, "permutation of 1..k, comma separated");
    scan->add_option("--shifts", shifts_csv, "explicit shifts (overrides --perm)");
    scan->add_option("--mmax", mmax_str, "scan bound");
    scan->add_flag("--lambda", lambda_mode, "compare normalized eigenvalues");
    scan->add_option("--max-hits", max_hits, "cap on stored hits");

    auto* cons = app.add_subcommand("construct", "section-5 progression search");
    cons->add_option("--forms", forms_csv, "comma-separated form labels");
    cons->add_option("--shifts", shifts_csv, "comma-separated shifts nu_i")->required();
    cons->add_option("--delta", delta_str, "chain margin delta in (0,1)");
    cons->add_option("--eta", eta, "sifting exponent");
    cons->add_option("--eps", eps_str, "small-lambda threshold");
    cons->add_option("--x", x_str, "search window for n");
    cons->add_option("--table-nmax", table_nmax_str, "coefficient table bound");
    cons->add_flag("--lambda", lambda_mode, "force normalized-eigenvalue comparisons");
    cons->add_option("--max-hits", max_hits, "cap on stored hits");

    auto* stats = app.add_subcommand("sieve-stats", "sift a linear system and report counts");
    stats->add_option("--system", system_arg, "JSON file or inline JSON")->required();
    stats->add_option("--x", x_str, "window size");
    stats->add_option("--z", z_str, "sifting level");
    stats->add_option("--eta", eta, "z = x^eta when --z is absent");
    stats->add_option("--dump", dump_path, "survivor dump path ('-' for stdout)");

    auto* st = app.add_subcommand("satotate", "empirical Sato-Tate diagnostics");
    st->add_option("--form", label, "form label");
    st->add_option("--xmax", xmax_str, "prime cutoff");
    st->add_option("--bins", bins, "histogram bins");
    st->add_option("--eps", eps_str, "small-lambda threshold");
    st->add_option("--hist", hist_path, "histogram CSV path");

    auto* chk = app.add_subcommand("check-conditions", "Theorem-1.4 condition checker");
    chk->add_option("--form", label, "form label");
    chk->add_option("--k", k, "window length")->required();
    chk->add_option("--nmax", table_nmax_str, "table / witness search bound");

    CLI11_PARSE(app, argc, argv);
    mpf_set_default_prec(std::max(cfg.precision_bits, 64u));

    try {
        if (app.got_subcommand(tau)) {
            uint64_t n = parse_count(n_str);
            if (n < 1) throw CLI::ValidationError("n", "n must be >= 1");
            return cmd_tau(cfg, n);
        }
        if (app.got_subcommand(expand)) return cmd_expand(cfg, label, parse_count(nmax_str), out_path);
        if (app.got_subcommand(ingest)) return cmd_ingest(path);
        if (app.got_subcommand(lehmer)) return cmd_lehmer(cfg, parse_count(nmax_str));
        if (app.got_subcommand(scan))
            return cmd_scan(cfg, label, k, perm_csv, shifts_csv, parse_count(mmax_str),
                            lambda_mode, max_hits);
        if (app.got_subcommand(cons))
            return cmd_construct(cfg, forms_csv, shifts_csv, delta_str, eta, eps_str,
                                 parse_count(x_str), parse_count(table_nmax_str), lambda_mode,
                                 max_hits);
        if (app.got_subcommand(stats))
            return cmd_sieve_stats(cfg, system_arg, parse_count(x_str), parse_count(z_str), eta,
                                   dump_path);
        if (app.got_subcommand(st))
            return cmd_satotate(cfg, label, parse_count(xmax_str), bins, eps_str, hist_path);
        if (app.got_subcommand(chk))
            return cmd_check_conditions(cfg, label, k, parse_count(table_nmax_str));
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
