// mhdec: structural analysis, flat partitions, verification and decoupling estimates for
// mixed-homogeneous polynomials.
//
// Exit codes: 0 ok, 1 usage or parse error, 2 not mixed-homogeneous, 3 construction failure,
// 4 verification failure, 5 resource budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mhdec/estimator.hpp"
#include "mhdec/partition.hpp"
#include "mhdec/polyalg.hpp"

#ifndef MHDEC_VERSION
#define MHDEC_VERSION "0.0.0"
#endif

namespace {

using namespace mhdec;

enum Exit : int { kOk = 0, kUsage = 1, kNotApplicable = 2, kConstruction = 3, kVerification = 4, kResource = 5 };

struct Options {
    std::string poly;
    double delta = 0;
    std::vector<double> delta_list;
    double c_flat = 64;
    double c_phi = 0.25;
    std::uint64_t seed = 1;
    int threads = 1;
    long samples = 1'000'000;
    int grid = 64;
    double box = 8;
    int trials = 8;
    int density = 4;
    int flat_grid = 5;
    std::string out;
    std::string svg;
    std::string input;
    bool json = false;
};

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string timestamp_utc() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void check_delta(double d) {
    if (!(d > 0 && d < 1)) throw UsageError("delta must lie in (0, 1), got " + fmt(d));
}

BivariatePoly read_poly(const std::string& text) {
    if (text.empty()) throw UsageError("--poly is required");
    return parse_poly(text);  // ParseError maps to exit 1
}

EngineConfig engine_config(const Options& o) {
    if (!(o.c_flat > 0)) throw UsageError("--c-flat must be positive");
    if (!(o.c_phi > 0 && o.c_phi <= 0.25)) throw UsageError("--c-phi must lie in (0, 1/4]");
    if (o.threads < 1) throw UsageError("--threads must be at least 1");
    EngineConfig cfg;
    cfg.C_flat = o.c_flat;
    cfg.c_phi = o.c_phi;
    cfg.seed = o.seed;
    return cfg;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open " + path + " for writing");
    f << text;
    if (!f) throw UsageError("write to " + path + " failed");
}

// ---- analyze ----

nlohmann::ordered_json factorization_json(const HomogeneousFactorization& f) {
    nlohmann::ordered_json j;
    j["nu1"] = f.nu1;
    j["nu2"] = f.nu2;
    auto cf = nlohmann::ordered_json::array();
    for (const auto& c : f.curve_factors) {
        nlohmann::ordered_json e;
        e["lambda"] = c.lambda.approx();
        e["lambda_interval"] = {c.lambda.lo.get_d(), c.lambda.hi.get_d()};
        e["multiplicity"] = c.multiplicity;
        cf.push_back(e);
    }
    j["curve_factors"] = cf;
    j["residual"] = f.residual.to_string();
    return j;
}

std::string factorization_text(const HomogeneousFactorization& f, const MixedHomogeneity& mh) {
    std::ostringstream os;
    bool any = false;
    auto sep = [&] {
        if (any) os << " * ";
        any = true;
    };
    auto power = [](const char* v, int e) { return e == 1 ? std::string(v) : std::string(v) + "^" + std::to_string(e); };
    if (f.nu1) {
        sep();
        os << power("x", f.nu1);
    }
    if (f.nu2) {
        sep();
        os << power("y", f.nu2);
    }
    for (const auto& c : f.curve_factors) {
        sep();
        double lam = c.lambda.approx();
        os << "(" << power("x", mh.s) << (lam < 0 ? " + " : " - ") << std::setprecision(12) << std::fabs(lam) << "*"
           << power("y", mh.r) << ")";
        if (c.multiplicity > 1) os << "^" << c.multiplicity;
    }
    if (!any || f.residual != BivariatePoly::constant(1)) {
        sep();
        os << "(" << f.residual.to_string() << ")";
    }
    return os.str();
}

int cmd_analyze(const Options& o) {
    BivariatePoly phi = read_poly(o.poly);
    if (phi.is_zero()) throw NotMixedHomogeneous("the zero polynomial has no weights");
    auto mh = detect_mixed_homogeneity(phi);
    if (!mh) throw NotMixedHomogeneous("polynomial is not mixed-homogeneous");
    BivariatePoly K = hessian_determinant(phi);
    HomogeneousFactorization fphi = factorize_mixed_homogeneous(phi, *mh);
    MixedHomogeneity mk{2 * (mh->q - mh->r - mh->s), mh->r, mh->s};
    std::optional<HomogeneousFactorization> fK;
    if (!K.is_zero() && !K.is_constant()) fK = factorize_mixed_homogeneous(K, mk);
    std::vector<ComponentInfo> comps = degenerate_components(phi, o.c_phi);
    ConvexityTag conv = convexity_tag(phi);

    // One entry per geometric component; quadrants listed.
    struct Group {
        ComponentInfo info;
        std::vector<int> quadrants;
    };
    std::vector<Group> groups;
    for (const auto& c : comps) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
            return g.info.kind == c.kind && g.info.tag == c.tag && g.info.k == c.k && g.info.lambda == c.lambda;
        });
        if (it == groups.end()) {
            groups.push_back({c, {c.quadrant}});
        } else if (std::find(it->quadrants.begin(), it->quadrants.end(), c.quadrant) == it->quadrants.end()) {
            it->quadrants.push_back(c.quadrant);
        }
    }

    nlohmann::ordered_json j;
    j["poly"] = phi.to_string();
    j["weights"] = {mh->q, mh->r, mh->s};
    j["hessian_determinant"] = K.to_string();
    j["determinant_weight_ok"] = K.is_zero() || verify_determinant_weight(phi, *mh);
    j["factorization"] = factorization_json(fphi);
    if (fK) j["determinant_factorization"] = factorization_json(*fK);
    auto jc = nlohmann::ordered_json::array();
    for (const auto& g : groups) {
        nlohmann::ordered_json e;
        e["kind"] = g.info.kind;
        e["case"] = to_string(g.info.tag);
        e["k"] = g.info.k;
        if (g.info.kind == "curve" || g.info.kind == "line") e["lambda"] = g.info.lambda;
        e["quadrants"] = g.quadrants;
        jc.push_back(e);
    }
    j["components"] = jc;
    j["convexity"] = to_string(conv);
    j["l2_applicable"] = conv == ConvexityTag::Convex;

    if (o.json) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "poly          " << phi.to_string() << "\n"
                  << "weights       q=" << mh->q << " r=" << mh->r << " s=" << mh->s << "\n"
                  << "K             " << (K.is_zero() ? "0 (cylinder)" : K.to_string()) << "\n"
                  << "factorization " << factorization_text(fphi, *mh) << "\n";
        if (fK) std::cout << "K factored    " << factorization_text(*fK, mk) << "\n";
        if (groups.empty()) std::cout << "components    none\n";
        for (const auto& g : groups) {
            std::cout << "component     " << g.info.kind << " case=" << to_string(g.info.tag) << " k=" << g.info.k;
            if (g.info.kind == "curve" || g.info.kind == "line") std::cout << " lambda=" << g.info.lambda;
            std::cout << " quadrants=";
            for (std::size_t i = 0; i < g.quadrants.size(); ++i) std::cout << (i ? "," : "") << g.quadrants[i];
            std::cout << "\n";
        }
        std::cout << "convexity     " << to_string(conv) << "\n";
    }
    if (!o.out.empty()) write_text(o.out, j.dump(2) + "\n");
    return kOk;
}

// ---- partition ----

RunManifest manifest(const std::string& command, const Options& o, const std::vector<std::pair<std::string, std::string>>& cfg) {
    RunManifest m;
    m.command = command;
    m.tool_version = MHDEC_VERSION;
    m.timestamp = timestamp_utc();
    m.poly = o.poly;
    m.seed = o.seed;
    m.config = cfg;
    return m;
}

int cmd_partition(const Options& o) {
    BivariatePoly phi = read_poly(o.poly);
    check_delta(o.delta);
    EngineConfig cfg = engine_config(o);
    Partition P = decompose(phi, o.delta, cfg);
    RunManifest m = manifest("partition", o,
                             {{"delta", fmt(o.delta)}, {"c_flat", fmt(o.c_flat)}, {"c_phi", fmt(o.c_phi)},
                              {"seed", std::to_string(o.seed)}, {"threads", std::to_string(o.threads)}});
    std::string text = partition_to_json(P, &m);
    write_text(o.out, text);
    if (!o.svg.empty()) write_text(o.svg, partition_to_svg(P));
    std::ostream& log = o.out.empty() || o.out == "-" ? std::cerr : std::cout;
    log << "pieces " << P.pieces.size() << " (";
    bool first = true;
    for (const auto& [t, n] : P.stats.per_case) {
        log << (first ? "" : ", ") << to_string(t) << " " << n;
        first = false;
    }
    log << "), radial levels " << P.stats.radial_levels << ", c_phi " << P.stats.c_phi << "\n";
    for (const auto& w : P.stats.warnings) log << "warning: " << w << "\n";
    return kOk;
}

// ---- verify ----

int cmd_verify(const Options& o) {
    if (o.input.empty()) throw UsageError("verify needs a partition JSON file");
    std::ifstream f(o.input, std::ios::binary);
    if (!f) throw UsageError("cannot open " + o.input);
    std::stringstream ss;
    ss << f.rdbuf();
    Partition P;
    try {
        P = partition_from_json(ss.str());
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    if (o.samples < 10'000) throw UsageError("--samples must be at least 10000");
    if (o.flat_grid < 3) throw UsageError("--grid must be at least 3");
    if (o.c_flat != 64) P.config.C_flat = o.c_flat;
    if (P.pieces.empty()) {
        std::cout << "FAIL: partition has no pieces\n";
        return kVerification;
    }
    VerifyReport r = verify_partition(P, o.samples, o.flat_grid, o.seed);
    std::cout << "pieces        " << r.pieces << "\n"
              << "samples       " << r.coverage.samples << "\n"
              << "covered       " << std::setprecision(10) << r.coverage.covered_fraction << "\n"
              << "multiplicity  max " << r.coverage.max_multiplicity << ", histogram";
    for (const auto& [k, n] : r.coverage.histogram) std::cout << " " << k << ":" << n;
    const PartitionPiece& w = P.pieces[r.worst_piece];
    std::cout << "\nworst ratio   " << std::setprecision(6) << r.worst_ratio << " (C_flat " << r.C_flat << ") at piece "
              << r.worst_piece << " " << to_string(w.tag) << " level " << w.radial_level << "\n";
    if (!r.covered()) {
        std::cout << "FAIL: point (" << r.coverage.first_uncovered.x << ", " << r.coverage.first_uncovered.y
                  << ") is not covered\n";
        return kVerification;
    }
    if (!r.flat()) {
        std::cout << "FAIL: piece " << r.worst_piece << " (" << to_string(w.tag) << ", level " << w.radial_level
                  << ") has flatness ratio " << r.worst_ratio << " > " << r.C_flat << "\n";
        return kVerification;
    }
    std::cout << "PASS\n";
    return kOk;
}

// ---- estimate ----

int cmd_estimate(const Options& o) {
    BivariatePoly phi = read_poly(o.poly);
    std::vector<double> deltas = o.delta_list;
    if (deltas.empty() && o.delta != 0) deltas.push_back(o.delta);
    if (deltas.empty()) throw UsageError("estimate needs --delta or --delta-list");
    for (double d : deltas) check_delta(d);
    if (o.grid < 16) throw UsageError("--grid must be at least 16");
    if (!(o.box >= 1)) throw UsageError("--box must be at least 1");
    if (o.trials < 1) throw UsageError("--trials must be at least 1");
    if (o.density < 1) throw UsageError("--density must be at least 1");
    EngineConfig cfg = engine_config(o);
    EstimatorOptions eo;
    eo.trials = o.trials;
    eo.grid = GridSpec{o.grid, o.box};
    eo.seed = o.seed;
    eo.density = o.density;
    NumPoly num = NumPoly::from_exact(phi);
    std::string csv = ratio_csv_header() + "\n";
    for (double d : deltas) {
        Partition P = decompose(phi, d, cfg);
        RatioReport r = decoupling_ratio(num, P.shapes(), d, eo);
        csv += ratio_csv_row(r) + "\n";
    }
    write_text(o.out, csv);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flat partitions and decoupling estimates for mixed-homogeneous polynomials"};
    app.set_version_flag("--version", MHDEC_VERSION);
    app.require_subcommand(1);
    Options o;

    auto add_poly = [&](CLI::App* c) { c->add_option("-p,--poly", o.poly, "polynomial, e.g. \"x^4+6*x^2*y+6*y^2\"")->required(); };
    auto add_engine = [&](CLI::App* c) {
        c->add_option("--c-flat", o.c_flat, "flatness constant C_flat")->capture_default_str();
        c->add_option("--c-phi", o.c_phi, "initial separation constant c_phi in (0, 1/4]")->capture_default_str();
        c->add_option("--seed", o.seed, "seed")->capture_default_str();
        c->add_option("--threads", o.threads, "worker cap (the engine runs on one thread)")->capture_default_str();
    };

    CLI::App* analyze = app.add_subcommand("analyze", "weights, K, factorization, components, case tags, convexity");
    add_poly(analyze);
    analyze->add_option("--c-phi", o.c_phi, "separation constant used to plan components")->capture_default_str();
    analyze->add_flag("--json", o.json, "print the JSON report instead of text");
    analyze->add_option("--out", o.out, "also write the JSON report to this file");

    CLI::App* partition = app.add_subcommand("partition", "build the delta-flat partition of [-1,1]^2");
    add_poly(partition);
    partition->add_option("-d,--delta", o.delta, "scale delta in (0, 1)")->required();
    add_engine(partition);
    partition->add_option("--out", o.out, "partition JSON (default stdout)");
    partition->add_option("--svg", o.svg, "SVG rendering of the pieces");

    CLI::App* verify = app.add_subcommand("verify", "coverage, overlap and flatness of a partition file");
    verify->add_option("input", o.input, "partition JSON")->required();
    verify->add_option("--samples", o.samples, "coverage samples")->capture_default_str();
    verify->add_option("--grid", o.flat_grid, "flatness sample grid per piece")->capture_default_str();
    verify->add_option("--seed", o.seed, "sampling seed")->default_str("7");
    verify->add_option("--c-flat", o.c_flat, "flatness bound (default: the partition's C_flat)");
    verify->add_option("--threads", o.threads, "worker cap (verification runs on one thread)");

    CLI::App* estimate = app.add_subcommand("estimate", "decoupling ratios D4, D2 per delta as CSV");
    add_poly(estimate);
    estimate->add_option("-d,--delta", o.delta, "single delta");
    estimate->add_option("--delta-list", o.delta_list, "comma-separated deltas")->delimiter(',');
    add_engine(estimate);
    estimate->add_option("--grid", o.grid, "FFT points per axis N")->capture_default_str();
    estimate->add_option("--box", o.box, "period box side T")->capture_default_str();
    estimate->add_option("--trials", o.trials, "random-phase trials")->capture_default_str();
    estimate->add_option("--density", o.density, "frequencies per piece")->capture_default_str();
    estimate->add_option("--out", o.out, "CSV file (default stdout)");
    partition->get_option("--seed")->default_str("1");
    estimate->get_option("--seed")->default_str("0");
    o.seed = 1;

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }
    // estimate defaults to seed 0 so that its streams match the library default.
    if (estimate->parsed() && estimate->count("--seed") == 0) o.seed = 0;
    if (verify->parsed() && verify->count("--seed") == 0) o.seed = 7;

    try {
        if (analyze->parsed()) return cmd_analyze(o);
        if (partition->parsed()) return cmd_partition(o);
        if (verify->parsed()) return cmd_verify(o);
        if (estimate->parsed()) return cmd_estimate(o);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kUsage;
    } catch (const NotMixedHomogeneous& e) {
        std::cerr << "not applicable: " << e.what() << "\n";
        return kNotApplicable;
    } catch (const EstimateViolation& e) {
        std::cerr << "construction failed: estimate " << e.lemma << " violated: " << e.what() << "\n";
        return kConstruction;
    } catch (const ConstructionError& e) {
        std::cerr << "construction failed: " << e.what() << "\n";
        return kConstruction;
    } catch (const ResourceBudgetExceeded& e) {
        std::cerr << "resource budget: " << e.what() << "\n";
        return kResource;
    } catch (const std::bad_alloc&) {
        std::cerr << "resource budget: out of memory\n";
        return kResource;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "construction failed: " << e.what() << "\n";
        return kConstruction;
    }
    return kUsage;
}
