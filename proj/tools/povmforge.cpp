// povmforge command-line front end: compile POVMs to interferometer settings,
// simulate and verify them, reconstruct measurements from counts, and run the
// benchmark suites.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "povmforge/compiler.hpp"
#include "povmforge/serialize.hpp"
#include "povmforge/simulator.hpp"
#include "povmforge/tasks.hpp"
#include "povmforge/tomography.hpp"

#include <json.hpp>

namespace pf = povmforge;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct GlobalFlags {
    std::uint64_t seed = 1;
    double tol = 1e-8;
    bool json_output = false;
    int threads = 0;
};

int effective_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("POVM_FORGE_THREADS"))
        if (int v = std::atoi(env); v > 0) return v;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

pf::StateSet random_probes(int dim, int count, std::uint64_t seed) {
    pf::SplitMix64 rng(seed);
    pf::StateSet s;
    s.dim = dim;
    for (int i = 0; i < count; ++i) {
        pf::Ket k(dim);
        for (int r = 0; r < dim; ++r) k(r) = pf::Cplx(rng.gaussian(), rng.gaussian());
        s.states.push_back(k / k.norm());
    }
    return s;
}

void emit_record(const GlobalFlags& flags, const std::string& name, const json& inputs,
                 double value, const json& details) {
    if (flags.json_output) {
        json rec{{"inputs", inputs}, {"value", value}, {"details", details}};
        std::cout << json{{name, rec}}.dump(2) << "\n";
    }
}

struct BenchRow {
    std::string label;
    double value;
    std::optional<double> reference;
};

void print_table(const std::string& title, const std::vector<BenchRow>& rows,
                 const std::string& csv_path) {
    std::printf("%s\n", title.c_str());
    std::printf("%-28s %14s %14s\n", "quantity", "computed", "reference");
    for (const auto& r : rows) {
        if (r.reference)
            std::printf("%-28s %14.6f %14.6f\n", r.label.c_str(), r.value, *r.reference);
        else
            std::printf("%-28s %14.6f %14s\n", r.label.c_str(), r.value, "-");
    }
    if (!csv_path.empty()) {
        static std::set<std::string> opened;
        const bool fresh = opened.insert(csv_path).second;
        std::ofstream csv(csv_path, fresh ? std::ios::trunc : std::ios::app);
        if (fresh) csv << "quantity,computed,reference\n";
        for (const auto& r : rows) {
            csv << r.label << "," << r.value << ",";
            if (r.reference) csv << *r.reference;
            csv << "\n";
        }
    }
}

int cmd_compile(const GlobalFlags&, const std::string& povm_path, const std::string& out_path) {
    pf::Povm povm;
    try {
        povm = pf::povm_from_json(pf::read_file(povm_path));
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    }
    auto report = pf::validate_povm(povm);
    if (!report.pass) {
        std::cerr << "input error: POVM failed validation: " << report.message << "\n";
        return kExitInput;
    }
    try {
        auto res = pf::compile(povm);
        pf::write_file(out_path, pf::program_to_json(res.program));
        std::printf("compiled %d outcomes on dimension %d -> %zu modules\n", povm.size(),
                    povm.dim(), res.program.modules.size());
        for (size_t i = 0; i < res.trace.stages.size(); ++i)
            std::printf("  module %2zu: l=%d b=%.6f\n", i + 1, res.trace.stages[i].l,
                        res.trace.stages[i].b);
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

int cmd_verify(const GlobalFlags& flags, const std::string& program_path,
               const std::string& povm_path, const std::string& probe_kind, int trials) {
    if (trials < 1) {
        std::cerr << "input error: --trials must be positive\n";
        return kExitInput;
    }
    pf::CircuitProgram prog;
    pf::Povm povm;
    try {
        prog = pf::program_from_json(pf::read_file(program_path));
        povm = pf::povm_from_json(pf::read_file(povm_path));
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    }
    if (prog.dim != povm.dim() || prog.n_outcomes != povm.size()) {
        std::cerr << "input error: program and POVM shapes disagree\n";
        return kExitInput;
    }
    pf::StateSet probes;
    if (probe_kind == "mub") {
        if (prog.dim != 4) {
            std::cerr << "input error: mub probes need dimension 4\n";
            return kExitInput;
        }
        probes = pf::mub_probe_states_d4();
    } else {
        probes = random_probes(prog.dim, trials, flags.seed);
    }
    double worst = 0.0;
    int worst_outcome = -1, worst_probe = -1;
    for (size_t j = 0; j < probes.states.size(); ++j) {
        auto p = pf::simulate(prog, probes.states[j]);
        for (int i = 0; i < povm.size(); ++i) {
            const double dev = std::abs(p(i) - povm.born_probability(i, probes.states[j]));
            if (dev > worst) {
                worst = dev;
                worst_outcome = i;
                worst_probe = static_cast<int>(j);
            }
        }
    }
    std::printf("max |p_sim - p_born| = %.3e", worst);
    if (worst_outcome >= 0) std::printf("  (outcome %d, probe %d)", worst_outcome, worst_probe);
    std::printf("\n");
    emit_record(flags, "verify", {{"probes", probe_kind}, {"trials", trials}}, worst, {});
    return worst < flags.tol ? kExitOk : kExitNumerical;
}

int cmd_simulate(const GlobalFlags& flags, const std::string& program_path,
                 const std::string& state_path) {
    try {
        auto prog = pf::program_from_json(pf::read_file(program_path));
        auto states = pf::state_set_from_json(pf::read_file(state_path));
        json all = json::array();
        for (size_t j = 0; j < states.states.size(); ++j) {
            auto p = pf::simulate(prog, states.states[j]);
            json probs = json::array();
            for (int i = 0; i < p.size(); ++i) probs.push_back(p(i));
            all.push_back(probs);
            if (!flags.json_output) {
                std::printf("state %zu:", j);
                for (int i = 0; i < p.size(); ++i) std::printf(" %.6f", p(i));
                std::printf("\n");
            }
        }
        if (flags.json_output) std::cout << all.dump(2) << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    }
}

int cmd_sample(const GlobalFlags& flags, const std::string& program_path,
               const std::string& state_path, std::int64_t shots, const std::string& out_path,
               bool mub) {
    try {
        auto prog = pf::program_from_json(pf::read_file(program_path));
        auto states = mub ? pf::mub_probe_states_d4()
                          : pf::state_set_from_json(pf::read_file(state_path));
        auto table = pf::sample_counts(prog, states, shots, flags.seed);
        pf::write_file(out_path, pf::count_table_to_json(table));
        std::printf("sampled %lld shots x %d probes -> %s\n",
                    static_cast<long long>(shots), table.n_probes, out_path.c_str());
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    }
}

int cmd_tomo(const GlobalFlags& flags, const std::string& counts_path,
             const std::string& out_path, const std::string& ideal_path) {
    try {
        auto counts = pf::count_table_from_json(pf::read_file(counts_path));
        auto probes = pf::mub_probe_states_d4();
        auto res = pf::mle_reconstruct(probes, counts);
        pf::write_file(out_path, pf::povm_to_json(res.povm));
        std::printf("reconstructed %d outcomes in %d iterations (logL %.6f)\n",
                    res.povm.size(), res.iterations, res.log_likelihood);
        if (!ideal_path.empty()) {
            auto ideal = pf::povm_from_json(pf::read_file(ideal_path));
            const double f = pf::measurement_fidelity(res.povm, ideal);
            std::printf("measurement fidelity vs ideal: %.6f\n", f);
            emit_record(flags, "tomo", {{"counts", counts_path}}, f, {});
        }
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

int cmd_calibrate(const GlobalFlags& flags, const std::string& program_path,
                  const std::string& counts_path, const std::string& out_path) {
    try {
        auto prog = pf::program_from_json(pf::read_file(program_path));
        auto counts = pf::count_table_from_json(pf::read_file(counts_path));
        auto probes = pf::mub_probe_states_d4();
        auto cal = pf::calibrate(prog, probes, counts);
        pf::write_file(out_path, pf::phase_error_to_json(cal.deviations));
        std::printf("calibration residual %.3e after %d iterations%s\n", cal.residual,
                    cal.iterations, cal.converged ? "" : " (not converged)");
        std::printf("correction rule: set phases to ideal minus the reported deviations\n");
        emit_record(flags, "calibrate", {{"program", program_path}}, cal.residual, {});
        return cal.converged ? kExitOk : kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    }
}

int cmd_make(const GlobalFlags& flags, const std::string& object, const std::string& out_path,
             int dim, int outcomes) {
    try {
        std::string text;
        if (object == "sic-povm") {
            text = pf::povm_to_json(pf::sic_povm_d4());
        } else if (object == "mub-states") {
            text = pf::state_set_to_json(pf::mub_probe_states_d4());
        } else if (object == "sic-states") {
            text = pf::state_set_to_json(pf::sic_states_d4());
        } else if (object == "usd-set1" || object == "usd-set2" || object == "usd-set3") {
            const int k = object.back() - '1';
            text = pf::state_set_to_json(pf::usd_state_sets()[k]);
        } else if (object == "random-povm") {
            text = pf::povm_to_json(pf::random_rank1_povm(dim, outcomes, flags.seed));
        } else {
            std::cerr << "input error: unknown object " << object << "\n";
            return kExitInput;
        }
        pf::write_file(out_path, text);
        std::printf("wrote %s to %s\n", object.c_str(), out_path.c_str());
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    }
}

int bench_usd(const GlobalFlags& flags, const std::string& csv) {
    auto sets = pf::usd_state_sets();
    const double ref[3] = {0.7259, 0.5974, 0.5575};
    std::vector<BenchRow> rows;
    for (int k = 0; k < 3; ++k) {
        auto r = pf::tasks::usd_optimize(sets[k]);
        rows.push_back({"p_incn set" + std::to_string(k + 1), r.p_inconclusive, ref[k]});
        emit_record(flags, "usd", {{"set", k + 1}}, r.p_inconclusive,
                    {{"a", r.coefficients}});
    }
    print_table("unambiguous discrimination: inconclusive probability", rows, csv);
    return kExitOk;
}

int bench_mesd(const GlobalFlags& flags, const std::string& csv) {
    auto sets = pf::usd_state_sets();
    const double ref[3] = {0.1364, 0.0921, 0.0953};
    std::vector<BenchRow> rows;
    for (int k = 0; k < 3; ++k) {
        const double v = pf::tasks::mesd_min_error(sets[k]);
        rows.push_back({"p_err set" + std::to_string(k + 1), v, ref[k]});
        emit_record(flags, "mesd", {{"set", k + 1}}, v, {});
    }
    print_table("minimum-error discrimination", rows, csv);
    return kExitOk;
}

int bench_gram(const GlobalFlags& flags, const std::string& csv) {
    auto sets = pf::usd_state_sets();
    const double ref[3] = {0.3011, 0.4446, 0.4275};
    std::vector<BenchRow> rows;
    for (int k = 0; k < 3; ++k) {
        const double v = pf::gram_det(sets[k]);
        rows.push_back({"det(G) set" + std::to_string(k + 1), v, ref[k]});
        emit_record(flags, "gram", {{"set", k + 1}}, v, {});
    }
    print_table("gram determinants", rows, csv);
    return kExitOk;
}

int bench_estimate(const GlobalFlags& flags, const std::string& csv) {
    auto opt = pf::tasks::two_copy_optimal_povm();
    auto mp = pf::tasks::massar_popescu_povm();
    pf::SplitMix64 rng(flags.seed);
    double worst_opt = 1.0;
    for (int t = 0; t < 50; ++t) {
        Eigen::Vector3d n{rng.gaussian(), rng.gaussian(), rng.gaussian()};
        n.normalize();
        worst_opt = std::min(worst_opt, pf::tasks::estimation_fidelity(opt, n));
    }
    std::vector<BenchRow> rows = {
        {"optimal F (50 random n)", worst_opt, 0.75},
        {"massar-popescu mean F", pf::tasks::average_estimation_fidelity(mp), 0.75},
        {"massar-popescu min F", pf::tasks::worst_case_estimation_fidelity(mp), 2.0 / 3.0},
    };
    print_table("two-copy estimation fidelity", rows, csv);
    emit_record(flags, "estimate", {}, worst_opt, {});
    return kExitOk;
}

int bench_witness(const GlobalFlags& flags, const std::string& csv) {
    auto sic = pf::sic_povm_d4();
    std::vector<BenchRow> rows = {{"ideal SIC witness", pf::tasks::sic_witness(sic), 0.25}};
    print_table("state-discrimination witness", rows, csv);
    emit_record(flags, "witness", {}, rows[0].value, {});
    return kExitOk;
}

int bench_noutcome(const GlobalFlags& flags, bool fast, const std::string& csv) {
    const double table[16] = {0.0625, 0.1184, 0.1708, 0.2210, 0.2263, 0.2323, 0.2367, 0.2392,
                              0.2418, 0.2431, 0.2445, 0.2458, 0.2471, 0.2481, 0.2491, 0.2500};
    std::vector<int> ns;
    if (fast)
        ns = {1, 2, 3, 4, 15, 16};
    else
        for (int n = 1; n <= 16; ++n) ns.push_back(n);
    pf::tasks::NOutcomeOptions opts;
    opts.threads = effective_threads(flags.threads);
    std::vector<BenchRow> rows;
    for (int n : ns) {
        const double v = pf::tasks::max_psuc_n_outcomes(n, opts);
        rows.push_back({"max p_suc N=" + std::to_string(n), v, table[n - 1]});
        emit_record(flags, "noutcome", {{"N", n}}, v, {});
    }
    print_table("largest witness with at most N outcomes", rows, csv);
    return kExitOk;
}

int bench_hmin(const GlobalFlags& flags, const std::string& csv) {
    auto r = pf::tasks::min_entropy(0.24730);
    std::vector<BenchRow> rows = {{"H_min at W=0.24730", r.h_min, 2.740}};
    print_table("certified min-entropy", rows, csv);
    emit_record(flags, "hmin", {{"W", 0.24730}}, r.h_min,
                {{"p_guess", r.guessing_probability}});
    return kExitOk;
}

int bench_shannon(const GlobalFlags& flags, const std::string& csv) {
    pf::tasks::ShannonBoundOptions opts;
    opts.sdp.threads = effective_threads(flags.threads);
    auto r = pf::tasks::shannon_bound(0.24730, 8, 1, opts);
    std::vector<BenchRow> rows = {{"H bound (W=0.24730, m=8)", r.bound, 2.951}};
    print_table("certified Shannon entropy (order 2k=2)", rows, csv);
    emit_record(flags, "shannon", {{"W", 0.24730}, {"m", 8}, {"k", 1}}, r.bound,
                {{"c_m", r.c_m}});
    return kExitOk;
}

int bench_eat(const GlobalFlags& flags, const std::string& csv) {
    pf::tasks::EatParams p;
    p.c_m = 9.2305;
    p.r_tilde = -65.2748;
    p.s_tilde = 238.8474;
    p.w_obs = 0.24730;
    p.var_w = 5e-5;
    p.n_rounds = 1196436;
    p.epsilon = 1e-4;
    p.d_a = 4;
    p.prob_omega = 0.2;
    auto r = pf::tasks::eat_rate(p);
    std::vector<BenchRow> rows = {
        {"f_min(W_obs)", r.f_min_at_w, 3.0227},
        {"finite-size correction", r.correction, 0.0441},
        {"certified bits per round", r.rate, 2.9786},
    };
    print_table("entropy accumulation rate", rows, csv);
    emit_record(flags, "eat", {{"N", p.n_rounds}}, r.rate, {{"correction", r.correction}});
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"povmforge: compile, simulate and certify finite quantum measurements"};
    app.require_subcommand(1);

    GlobalFlags flags;
    app.add_option("--seed", flags.seed, "PRNG seed (SplitMix64)");
    app.add_option("--tol", flags.tol, "numeric tolerance for checks");
    app.add_flag("--json", flags.json_output, "machine-readable output");
    app.add_option("--threads", flags.threads,
                   "worker threads for sweeps (default: POVM_FORGE_THREADS or all cores)");

    std::string povm_path, program_path, out_path, state_path, counts_path, ideal_path, csv_path;
    std::string probe_kind = "random";
    int trials = 20;
    std::int64_t shots = 100000;
    bool fast = false;

    auto* c_compile = app.add_subcommand("compile", "lower a POVM to MZI settings");
    c_compile->add_option("povm", povm_path)->required();
    c_compile->add_option("output", out_path)->required();

    auto* c_verify = app.add_subcommand("verify", "check a program against the Born rule");
    c_verify->add_option("program", program_path)->required();
    c_verify->add_option("povm", povm_path)->required();
    c_verify->add_option("--probes", probe_kind)->check(CLI::IsMember({"random", "mub"}));
    c_verify->add_option("--trials", trials);

    auto* c_sim = app.add_subcommand("simulate", "outcome probabilities for given states");
    c_sim->add_option("program", program_path)->required();
    c_sim->add_option("states", state_path)->required();

    bool sample_mub = false;
    auto* c_sample = app.add_subcommand("sample", "multinomial counts from a program");
    c_sample->add_option("program", program_path)->required();
    c_sample->add_option("output", out_path)->required();
    c_sample->add_option("--states", state_path, "probe state set (JSON)");
    c_sample->add_flag("--mub", sample_mub, "use the built-in d=4 MUB probes");
    c_sample->add_option("--shots", shots);

    auto* c_tomo = app.add_subcommand("tomo", "maximum-likelihood POVM reconstruction "
                                              "(MUB probes, d=4)");
    c_tomo->add_option("counts", counts_path)->required();
    c_tomo->add_option("output", out_path)->required();
    c_tomo->add_option("--ideal", ideal_path, "ideal POVM for a fidelity report");

    auto* c_cal = app.add_subcommand("calibrate", "estimate phase deviations from counts");
    c_cal->add_option("program", program_path)->required();
    c_cal->add_option("counts", counts_path)->required();
    c_cal->add_option("output", out_path)->required();

    std::string make_object;
    int make_dim = 4, make_outcomes = 16;
    auto* c_make = app.add_subcommand("make", "emit a built-in object as JSON");
    c_make->add_option("object", make_object)
        ->required()
        ->check(CLI::IsMember({"sic-povm", "sic-states", "mub-states", "usd-set1", "usd-set2",
                               "usd-set3", "random-povm"}));
    c_make->add_option("output", out_path)->required();
    c_make->add_option("--dim", make_dim, "dimension for random-povm");
    c_make->add_option("--outcomes", make_outcomes, "outcome count for random-povm");

    auto* c_bench = app.add_subcommand("bench", "reproduce the published benchmark values");
    std::string suite;
    c_bench->add_option("suite", suite)
        ->required()
        ->check(CLI::IsMember({"usd", "mesd", "gram", "estimate", "witness", "noutcome", "hmin",
                               "shannon", "eat", "all"}));
    c_bench->add_flag("--fast", fast, "reduced N sweep for the noutcome suite");
    c_bench->add_option("--csv", csv_path, "also write the table as CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_compile) return cmd_compile(flags, povm_path, out_path);
        if (*c_verify) return cmd_verify(flags, program_path, povm_path, probe_kind, trials);
        if (*c_sim) return cmd_simulate(flags, program_path, state_path);
        if (*c_sample) {
            if (!sample_mub && state_path.empty()) {
                std::cerr << "input error: need --states or --mub\n";
                return kExitInput;
            }
            return cmd_sample(flags, program_path, state_path, shots, out_path, sample_mub);
        }
        if (*c_tomo) return cmd_tomo(flags, counts_path, out_path, ideal_path);
        if (*c_cal) return cmd_calibrate(flags, program_path, counts_path, out_path);
        if (*c_make) return cmd_make(flags, make_object, out_path, make_dim, make_outcomes);
        if (*c_bench) {
            if (suite == "usd") return bench_usd(flags, csv_path);
            if (suite == "mesd") return bench_mesd(flags, csv_path);
            if (suite == "gram") return bench_gram(flags, csv_path);
            if (suite == "estimate") return bench_estimate(flags, csv_path);
            if (suite == "witness") return bench_witness(flags, csv_path);
            if (suite == "noutcome") return bench_noutcome(flags, fast, csv_path);
            if (suite == "hmin") return bench_hmin(flags, csv_path);
            if (suite == "shannon") return bench_shannon(flags, csv_path);
            if (suite == "eat") return bench_eat(flags, csv_path);
            int rc = bench_gram(flags, csv_path);
            rc |= bench_usd(flags, csv_path);
            rc |= bench_mesd(flags, csv_path);
            rc |= bench_estimate(flags, csv_path);
            rc |= bench_witness(flags, csv_path);
            rc |= bench_noutcome(flags, true, csv_path);
            rc |= bench_hmin(flags, csv_path);
            rc |= bench_eat(flags, csv_path);
            rc |= bench_shannon(flags, csv_path);
            return rc;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
