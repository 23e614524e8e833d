#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ielre/ielre.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCriterion = 2;
constexpr int kExitDiverged = 3;

struct CtArgs {
    std::string input;
    std::vector<std::string> estimators{"grad", "drem", "newlre"};
    double noise_amp = 0.0;
    std::uint64_t seed = ielre::presets::kNoiseSeed;
    double h = 1e-3;
    double t_end = 0.0;  // 0: default horizon of the input
    double g = static_cast<double>(ielre::presets::kCtKreGain);
    double mu = static_cast<double>(ielre::presets::kCtGeneratorMu);
    std::size_t stride = 1;
    std::string out;
};

struct DtArgs {
    std::string delta;
    double T = 0.01;
    double mu = 0.4;
    double beta = 0.75;
    double b = 0.1;
    double gamma = 0.1;
    double theta = 5.0;
    long long k_end = 5000;
    bool allow_divergence = false;
    std::string out;
};

struct ExciteArgs {
    std::string in;
    double window = 0.0;
    std::string column = "delta";
    double pe_threshold = static_cast<double>(ielre::kDefaultPeThreshold);
    double ie_threshold = static_cast<double>(ielre::kDefaultIeThreshold);
};

void print_summary(const ielre::ScenarioConfig& cfg, const ielre::RunRecord& rec) {
    const auto& s = rec.summary;
    std::cout << "scenario " << cfg.name << ": " << s.steps << " steps";
    if (s.diverged) std::cout << ", diverged at step " << *s.diverged_step;
    std::cout << "\n";
    for (const auto& [name, e] : s.estimators)
        std::cout << "  " << name << ": final error " << ielre::format_g(e.final_error, 6) << " (rel. "
                  << ielre::format_g(e.final_rel_error, 6) << ")\n";
    std::cout << "  min det " << ielre::format_g(s.min_raw_delta, 6) << ", max det "
              << ielre::format_g(s.max_delta, 6) << ", invariant violations " << s.invariant_violations() << "\n";
    if (!cfg.out_path.empty()) std::cout << "  wrote " << cfg.out_path << "\n";
}

int run_ct(const CtArgs& a) {
    const auto input = ielre::parse_signal(a.input);
    if (!input || !ielre::is_ct_kind(*input) || input->tag == ielre::SignalTag::Constant) {
        std::cerr << "ct-ident: --input must be upa or upb\n";
        return kExitUsage;
    }
    auto cfg = ielre::presets::ct_identification(*input);
    cfg.estimators.grad = cfg.estimators.drem = cfg.estimators.newlre = false;
    for (const auto& e : a.estimators) {
        if (e == "grad")
            cfg.estimators.grad = true;
        else if (e == "drem")
            cfg.estimators.drem = true;
        else if (e == "newlre")
            cfg.estimators.newlre = true;
        else {
            std::cerr << "ct-ident: unknown estimator '" << e << "'\n";
            return kExitUsage;
        }
    }
    if (a.noise_amp > 0.0) cfg.noise = ielre::NoiseSpec::uniform(a.noise_amp, a.seed);
    cfg.h = a.h;
    if (a.t_end > 0.0) cfg.t_end = a.t_end;
    cfg.kre.g = a.g;
    cfg.generator.mu = a.mu;
    cfg.record_stride = a.stride;
    cfg.out_path = a.out;
    print_summary(cfg, ielre::run_ct_scenario(cfg));
    return kExitOk;
}

int run_dt(const DtArgs& a) {
    const auto delta = ielre::parse_signal(a.delta);
    if (!delta || !ielre::is_dt_kind(*delta)) {
        std::cerr << "dt-scalar: --delta must be one of a, b, c, d\n";
        return kExitUsage;
    }
    auto cfg = ielre::presets::dt_scalar(*delta, a.T, a.gamma, a.k_end);
    cfg.generator.mu = a.mu;
    cfg.generator.beta = a.beta;
    cfg.generator.b_damp = a.b;
    cfg.theta = a.theta;
    cfg.expect_divergence = a.allow_divergence;
    cfg.out_path = a.out;
    for (const auto& w : ielre::validate(cfg.generator)) std::cerr << "warning: " << w << "\n";
    print_summary(cfg, ielre::run_dt_scenario(cfg));
    return kExitOk;
}

int run_excite(const ExciteArgs& a) {
    std::ifstream f(a.in);
    if (!f) {
        std::cerr << "excite: cannot read " << a.in << "\n";
        return kExitUsage;
    }
    std::string line;
    std::vector<std::string> header;
    std::vector<ielre::Real> first, values;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) fields.push_back(cell);
        if (header.empty()) {
            header = fields;
            continue;
        }
        if (fields.size() != header.size()) {
            std::cerr << "excite: ragged row in " << a.in << "\n";
            return kExitUsage;
        }
        const auto col = static_cast<std::size_t>(std::find(header.begin(), header.end(), a.column) - header.begin());
        if (col == header.size()) {
            std::cerr << "excite: no column '" << a.column << "' in " << a.in << "\n";
            return kExitUsage;
        }
        first.push_back(std::stold(fields[0]));
        values.push_back(std::stold(fields[col]));
    }
    if (header.empty() || values.empty()) {
        std::cerr << "excite: no data rows in " << a.in << "\n";
        return kExitUsage;
    }
    ielre::ExcitationReport rep;
    const ielre::Real pe = a.pe_threshold, ie = a.ie_threshold;
    if (header[0] == "t") {
        if (values.size() < 2) {
            std::cerr << "excite: need at least two rows\n";
            return kExitUsage;
        }
        rep = ielre::excitation_report_ct(std::span<const ielre::Real>(values), first[1] - first[0], a.window, pe, ie);
    } else {
        const auto w = static_cast<std::size_t>(a.window);
        if (w < 1 || static_cast<double>(w) != a.window) {
            std::cerr << "excite: DT window must be a positive whole number of samples\n";
            return kExitUsage;
        }
        rep = ielre::excitation_report_dt(std::span<const ielre::Real>(values), w, pe, ie);
    }
    std::cout << "column " << a.column << " (" << values.size() << " samples)\n"
              << "  verdict     " << ielre::to_string(rep.verdict) << "\n"
              << "  ie_constant " << ielre::format_g(rep.ie_constant, 6) << "\n"
              << "  ie_horizon  " << ielre::format_g(rep.ie_horizon, 6) << "\n"
              << "  pe_floor    " << ielre::format_g(rep.pe_floor, 6) << "\n"
              << "  window      " << ielre::format_g(rep.window, 6) << "\n";
    return kExitOk;
}

int run_check(const std::string& name) {
    const auto profile = ielre::parse_profile(name);
    if (!profile) {
        std::cerr << "check: --profile must be quick or full\n";
        return kExitUsage;
    }
    const auto rep = ielre::run_acceptance_suite(*profile, &std::cout);
    std::size_t passed = 0;
    for (const auto& c : rep.criteria) passed += c.pass ? 1 : 0;
    std::cout << passed << "/" << rep.criteria.size() << " criteria passed\n";
    return rep.all_pass() ? kExitOk : kExitCriterion;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Identification with DREM and an LRE generator"};
    app.require_subcommand(1);
    // Subcommands inherit this; a bare -h would collide with ct-ident --h.
    app.set_help_flag("--help", "Print this help message and exit");

    CtArgs ct;
    auto* ct_cmd = app.add_subcommand("ct-ident", "CT identification of the second-order plant");
    ct_cmd->add_option("--input", ct.input, "upa or upb")->required();
    ct_cmd->add_option("--estimators", ct.estimators, "any of grad, drem, newlre")->delimiter(',');
    ct_cmd->add_option("--noise-amp", ct.noise_amp, "uniform output noise amplitude (0 = none)")->check(CLI::NonNegativeNumber);
    ct_cmd->add_option("--seed", ct.seed, "noise seed");
    ct_cmd->add_option("--h,--step", ct.h, "RK4 step")->check(CLI::PositiveNumber);
    ct_cmd->add_option("--t-end", ct.t_end, "horizon (default 50 for upa, 100 for upb)")->check(CLI::PositiveNumber);
    ct_cmd->add_option("--g", ct.g, "KRE gain")->check(CLI::PositiveNumber);
    ct_cmd->add_option("--mu", ct.mu, "generator rate")->check(CLI::PositiveNumber);
    ct_cmd->add_option("--stride", ct.stride, "record every n-th step")->check(CLI::PositiveNumber);
    ct_cmd->add_option("--out", ct.out, "CSV path");

    DtArgs dt;
    auto* dt_cmd = app.add_subcommand("dt-scalar", "DT scalar experiment with a synthetic delta(k)");
    dt_cmd->add_option("--delta", dt.delta, "a, b, c or d")->required();
    dt_cmd->add_option("--T", dt.T, "step constant")->check(CLI::PositiveNumber);
    dt_cmd->add_option("--mu", dt.mu, "generator rate")->check(CLI::PositiveNumber);
    dt_cmd->add_option("--beta", dt.beta, "disk radius parameter (> 1/2)");
    dt_cmd->add_option("--b", dt.b, "damping in (0,1)");
    dt_cmd->add_option("--gamma", dt.gamma, "adaptation gain")->check(CLI::PositiveNumber);
    dt_cmd->add_option("--theta", dt.theta, "true parameter");
    dt_cmd->add_option("--k-end", dt.k_end, "last index")->check(CLI::NonNegativeNumber);
    dt_cmd->add_flag("--allow-divergence", dt.allow_divergence, "record a non-finite state instead of failing");
    dt_cmd->add_option("--out", dt.out, "CSV path");

    ExciteArgs ex;
    auto* ex_cmd = app.add_subcommand("excite", "excitation report on one CSV column");
    ex_cmd->add_option("--in", ex.in, "CSV written by ct-ident or dt-scalar")->required();
    ex_cmd->add_option("--window", ex.window, "seconds (CT) or samples (DT)")->required()->check(CLI::PositiveNumber);
    ex_cmd->add_option("--column", ex.column, "column name");
    ex_cmd->add_option("--pe-threshold", ex.pe_threshold);
    ex_cmd->add_option("--ie-threshold", ex.ie_threshold);

    std::string profile;
    auto* chk_cmd = app.add_subcommand("check", "run the acceptance criteria");
    chk_cmd->add_option("--profile", profile, "quick or full")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*ct_cmd) return run_ct(ct);
        if (*dt_cmd) return run_dt(dt);
        if (*ex_cmd) return run_excite(ex);
        if (*chk_cmd) return run_check(profile);
    } catch (const ielre::SimulationDiverged& e) {
        std::cerr << "diverged: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const ielre::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ielre::KindMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
