// Command-line front end: scenario simulation, parameter sweeps, pulse
// synthesis/verification, preset listing, and plot-data extraction.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "polsim/config.hpp"
#include "polsim/presets.hpp"
#include "polsim/protocols.hpp"
#include "polsim/pulse_synthesis.hpp"

using json = nlohmann::ordered_json;
using namespace polsim;

namespace {

constexpr const char* polsim_version = "1.0.0";

// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 non-convergence.
enum ExitCode { exit_ok = 0, exit_config = 2, exit_numerical = 3, exit_nonconvergence = 4 };

struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string protocol_name(Protocol p) {
    return p == Protocol::W ? "W" : p == Protocol::CZ ? "CZ" : "C2Z";
}

uint64_t fnv1a(const std::string& bytes) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string pulse_checksum(const PulseProfile& p) {
    std::ostringstream ss;
    ss << p.gate() << '\n' << fmt17(p.area()) << '\n';
    for (size_t i = 0; i < p.tau_samples().size(); ++i)
        ss << fmt17(p.tau_samples()[i]) << ' ' << fmt17(p.phi_samples()[i]) << '\n';
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)fnv1a(ss.str()));
    return buf;
}

std::string default_pulse_dir() {
    if (const char* env = std::getenv("POLSIM_ROOT")) return std::string(env) + "/data/pulses";
    return "data/pulses";
}

int worker_count(const ScenarioConfig& cfg) {
    if (cfg.workers > 0) return cfg.workers;
    if (const char* env = std::getenv("POLSIM_WORKERS"))
        if (int n = std::atoi(env); n > 0) return n;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? int(hc) : 2;
}

json params_json(const PhysicalParams& p) {
    return json{{"g", p.g},         {"kappa", p.kappa},       {"gamma", p.gamma},
                {"Delta", p.Delta}, {"delta", p.delta},       {"eta", p.eta},
                {"Omega0", p.Omega0}, {"delta_gl", p.delta_gl}, {"N", p.N},
                {"gamma1", p.gamma1}};
}

ProtocolResult run_resolved(const ResolvedScenario& r, double gT) {
    PhysicalParams p = r.params;
    const auto& cfg = r.config;
    if (cfg.protocol == Protocol::W) {
        // Keep the configured drive ratio fixed while gT varies.
        const double y = r.params.eta * r.params.eta / r.params.Omega0;
        p = resolve_w_params(p, gT, y);
        return run_w_preparation(p, gT, cfg.model, cfg.tol, r.m_max);
    }
    const double rr = r.params.Omega0 / (r.params.eta * r.params.eta);
    p = resolve_gate_params(p, cfg.protocol, gT, rr);
    return run_gate(cfg.protocol, p, r.pulse, gT, cfg.model, cfg.tol, r.m_max);
}

// Runs a resolved scenario, handling auto-convergence in gT.
ProtocolResult run_scenario_once(const ResolvedScenario& r) {
    const auto& cfg = r.config;
    if (!r.gT_auto) return run_resolved(r, r.gT);
    if (cfg.protocol == Protocol::W && cfg.gamma1 > 0.0 && cfg.model == ModelKind::Effective) {
        // γ₁ makes the infidelity diverge at large gT: scan for the optimum.
        const double y = r.params.eta * r.params.eta / r.params.Omega0;
        PhysicalParams base = r.params;
        const auto [gT_opt, F] = optimize_w_duration(base, y, cfg.model, 10.0, 1e5, cfg.tol);
        auto res = run_resolved(r, gT_opt);
        res.fidelity = F; // includes the analytic non-adiabatic residual
        return res;
    }
    ProtocolResult best;
    const auto [infid, gT_used] = converge_in_gT(
        [&](double gT) {
            best = run_resolved(r, gT);
            return 1.0 - best.fidelity;
        },
        r.gT / 8.0);
    (void)infid;
    (void)gT_used;
    return best;
}

void write_timeseries_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << "t,norm,n_e,n_ph,boundary";
    for (const auto& [name, series] : traj.populations) out << ',' << name;
    out << '\n';
    for (size_t i = 0; i < traj.times.size(); ++i) {
        out << fmt17(traj.times[i]) << ',' << fmt17(traj.norms[i]);
        out << ',' << (i < traj.n_e.size() ? fmt17(traj.n_e[i]) : "");
        out << ',' << (i < traj.n_ph.size() ? fmt17(traj.n_ph[i]) : "");
        out << ',' << (i < traj.boundary.size() ? fmt17(traj.boundary[i]) : "");
        for (const auto& [name, series] : traj.populations) out << ',' << fmt17(series[i]);
        out << '\n';
    }
}

void write_populations_csv(const std::string& path, const ProtocolResult& res) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    if (res.protocol == Protocol::W) {
        out << "n,P_Dn\n";
        for (int n = 0;; ++n) {
            const auto it = res.populations.find("D" + std::to_string(n));
            if (it == res.populations.end()) break;
            out << n << ',' << fmt17(it->second) << '\n';
        }
    } else {
        out << "state,population\n";
        for (const auto& [name, v] : res.populations) out << name << ',' << fmt17(v) << '\n';
    }
}

json result_json(const ScenarioConfig& cfg, const ResolvedScenario& r,
                 const ProtocolResult& res) {
    json j;
    j["version"] = polsim_version;
    j["timestamp"] = []() {
        char buf[32];
        const std::time_t t = std::time(nullptr);
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        return std::string(buf);
    }();
    j["protocol"] = protocol_name(cfg.protocol);
    j["model"] = cfg.model == ModelKind::Full ? "full" : "effective";
    j["params"] = params_json(res.params_used);
    j["gT"] = res.gT;
    j["tol"] = cfg.tol;
    j["m_max_used"] = res.m_max_used;
    j["truncation_peak"] = res.truncation_peak;
    j["fidelity"] = res.fidelity;
    j["infidelity"] = 1.0 - res.fidelity;
    if (cfg.protocol != Protocol::W) {
        j["theta_opt"] = res.theta_opt;
        j["pulse_checksum"] = pulse_checksum(r.pulse);
    }
    j["budget"] = json{{"gamma_loss", res.budget.gamma_loss},
                       {"kappa_loss", res.budget.kappa_loss},
                       {"residual", res.budget.residual}};
    j["populations"] = json::object();
    for (const auto& [name, v] : res.populations) j["populations"][name] = v;
    return j;
}

int cmd_simulate(const std::string& config_path) {
    const ScenarioConfig cfg = load_scenario_config(config_path);
    const ResolvedScenario r = resolve_scenario(cfg, default_pulse_dir());
    const ProtocolResult res = run_scenario_once(r);
    const json j = result_json(cfg, r, res);
    {
        std::ofstream out(cfg.output_path + ".json");
        if (!out) throw std::runtime_error("cannot open output file: " + cfg.output_path + ".json");
        out << j.dump(2) << '\n';
    }
    if (!res.trajectory.times.empty())
        write_timeseries_csv(cfg.output_path + ".csv", res.trajectory);
    write_populations_csv(cfg.output_path + "_populations.csv", res);
    std::cout << "fidelity " << fmt17(res.fidelity) << ", results in " << cfg.output_path
              << ".{json,csv}\n";
    return exit_ok;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::vector<double>& values) {
    const ScenarioConfig base = load_scenario_config(config_path);
    if (axis != "C" && axis != "gT" && axis != "gamma_over_kappa" && axis != "N")
        throw ConfigError("sweep axis must be one of C, gT, gamma_over_kappa, N");
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    if ((axis == "C" || axis == "gamma_over_kappa") && !base.C)
        throw ConfigError("sweeping " + axis + " requires the C + gamma_over_kappa loss form");

    struct Row {
        double value = 0.0;
        double fidelity = 0.0;
        double gT = 0.0;
        bool ok = false;
        std::string error;
    };
    std::vector<Row> rows(values.size());
    std::atomic<size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= values.size()) return;
            Row& row = rows[i];
            row.value = values[i];
            try {
                ScenarioConfig cfg = base;
                if (axis == "C") cfg.C = values[i];
                else if (axis == "gamma_over_kappa") cfg.gamma_over_kappa = values[i];
                else if (axis == "gT") cfg.gT = values[i];
                else cfg.N = int(values[i]);
                cfg.validate();
                const ResolvedScenario r = resolve_scenario(cfg, default_pulse_dir());
                const ProtocolResult res = run_scenario_once(r);
                row.fidelity = res.fidelity;
                row.gT = res.gT;
                row.ok = true;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const int nw = std::min<int>(worker_count(base), int(values.size()));
    for (int k = 0; k < nw; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    const std::string path = base.output_path + "_sweep.csv";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << axis << ",fidelity,infidelity,gT,error\n";
    for (const auto& row : rows) {
        out << fmt17(row.value) << ',';
        if (row.ok)
            out << fmt17(row.fidelity) << ',' << fmt17(1.0 - row.fidelity) << ','
                << fmt17(row.gT) << ",";
        else
            out << ",,,\"" << row.error << '"';
        out << '\n';
    }
    std::cout << "sweep over " << axis << " (" << values.size() << " points) written to " << path
              << '\n';
    for (const auto& row : rows)
        if (!row.ok) std::cerr << "point " << row.value << " failed: " << row.error << '\n';
    return exit_ok;
}

int cmd_pulse_synth(const std::string& gate_name, double area, int segments,
                    const std::string& out_path) {
    const Protocol gate = gate_name == "CZ" ? Protocol::CZ : Protocol::C2Z;
    const double a = area > 0.0 ? area : gate_area(gate);
    const auto res = synthesize_time_optimal(gate, a, segments);
    std::cout << "gate " << gate_name << ", area " << a << ": objective "
              << fmt17(res.objective) << " (" << res.message << ")\n";
    save_pulse(res.pulse, out_path);
    std::cout << "pulse written to " << out_path << '\n';
    if (!res.converged) throw NonConvergence(res.message);
    return exit_ok;
}

int cmd_pulse_verify(const std::string& path) {
    const PulseProfile p = load_pulse(path);
    std::cout << "gate " << p.gate() << ", area " << fmt17(p.area()) << ", "
              << p.tau_samples().size() << " samples, checksum " << pulse_checksum(p) << '\n';
    // Re-evaluate the gate phase conditions on the lossless effective branches.
    if (p.gate() != "CZ" && p.gate() != "C2Z")
        throw ConfigError("pulse file lacks a CZ/C2Z gate header");
    const Protocol gate = p.gate() == "CZ" ? Protocol::CZ : Protocol::C2Z;
    PhysicalParams pp;
    pp.N = gate_register_size(gate);
    pp.Delta = 1.0;
    pp.eta = 1.0;
    pp.Omega0 = 1.0;
    const auto em = build_effective_model(pp);
    const auto rated = p.with_rate(1.0, 0.0);
    std::vector<Complex> c(pp.N + 1);
    for (int N0 = 1; N0 <= pp.N; ++N0) {
        const auto H = build_effective_hamiltonian(em, N0, rated);
        VectorXcd psi0 = VectorXcd::Zero(2);
        psi0[0] = 1.0;
        c[N0] = evolve(H, psi0, p.area(), {1e-12}).final_state[0];
    }
    double J = std::norm(c[1] * c[1] + c[2]) + (1.0 - std::norm(c[1])) + (1.0 - std::norm(c[2]));
    if (gate == Protocol::C2Z)
        J += std::norm(c[1] * c[1] * c[1] - c[3]) + (1.0 - std::norm(c[3]));
    std::cout << "gate-condition objective " << fmt17(J) << '\n';
    if (J > 1e-5) throw NonConvergence("pulse does not satisfy the gate phase conditions");
    std::cout << "pulse verifies\n";
    return exit_ok;
}

int cmd_presets_list() {
    for (const auto& p : platform_presets()) {
        std::printf("%-18s kappa/g=%.6g gamma/g=%.6g gamma1/g=%.6g C=%.4g\n", p.name.c_str(),
                    p.kappa(), p.gamma(), p.gamma1(), p.cooperativity());
        std::printf("    %s\n", p.description.c_str());
    }
    return exit_ok;
}

// Plot-data extraction: selects and renames the figure's columns from a
// result table into a tidy CSV with axis metadata.
int cmd_plot(const std::string& table_path, const std::string& figure,
             const std::string& out_path) {
    struct FigureSpec {
        std::vector<std::pair<std::string, std::string>> columns; // (source, output)
        std::string x_label, y_label;
    };
    const std::map<std::string, FigureSpec> figures = {
        {"fig1d",
         {{{"t", "t"}, {"D0", "P_D0"}, {"D1", "P_D1"}, {"D2", "P_D2"}, {"trace", "trace"}},
          "t [1/g]", "population"}},
        {"fig1e", {{{"gT", "gT"}, {"infidelity", "infidelity"}}, "gT", "1-F"}},
        {"fig1f", {{{"C", "C"}, {"infidelity", "infidelity"}}, "C", "1-F"}},
        {"fig2a", {{{"t", "t"}, {"n_e", "n_e"}, {"n_ph", "n_ph"}}, "t [1/g]", "loss integrand"}},
        {"fig2b", {{{"n", "n"}, {"P_Dn", "P_Dn"}}, "n", "P_Dn"}},
        {"fig3a", {{{"gT", "gT"}, {"infidelity", "infidelity"}}, "gT", "1-F"}},
        {"fig3b", {{{"C", "C"}, {"infidelity", "infidelity"}}, "C", "1-F"}},
    };
    const auto fit = figures.find(figure);
    if (fit == figures.end()) throw ConfigError("unknown figure id: " + figure);

    std::ifstream in(table_path);
    if (!in) throw ConfigError("cannot open table file: " + table_path);
    std::string header;
    if (!std::getline(in, header)) throw ConfigError("empty table file: " + table_path);
    std::vector<std::string> cols;
    {
        std::stringstream ss(header);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    std::vector<int> pick;
    for (const auto& [src, dst] : fit->second.columns) {
        const auto it = std::find(cols.begin(), cols.end(), src);
        if (it == cols.end())
            throw ConfigError("table lacks column '" + src + "' required by " + figure);
        pick.push_back(int(it - cols.begin()));
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open output file: " + out_path);
    out << "# figure: " << figure << '\n';
    out << "# x: " << fit->second.x_label << '\n';
    out << "# y: " << fit->second.y_label << '\n';
    for (size_t i = 0; i < fit->second.columns.size(); ++i)
        out << (i ? "," : "") << fit->second.columns[i].second;
    out << '\n';
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        bool first = true;
        for (int idx : pick) {
            out << (first ? "" : ",") << (idx < int(fields.size()) ? fields[idx] : "");
            first = false;
        }
        out << '\n';
    }
    std::cout << "plot data for " << figure << " written to " << out_path << '\n';
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cavity-polariton blockade protocol simulator"};
    app.require_subcommand(1);

    std::string config_path, axis, values_csv, pulse_path, gate_name = "CZ", table_path,
                              figure, out_path = "pulse.out";
    double area = 0.0;
    int segments = 64;

    auto* sim = app.add_subcommand("simulate", "run a scenario config");
    sim->add_option("config", config_path, "scenario config file")->required();

    auto* sw = app.add_subcommand("sweep", "sweep one axis of a scenario");
    sw->add_option("config", config_path, "scenario config file")->required();
    sw->add_option("--axis", axis, "axis: C, gT, gamma_over_kappa, N")->required();
    sw->add_option("--values", values_csv, "comma-separated axis values")->required();

    auto* pulse = app.add_subcommand("pulse", "pulse synthesis and verification");
    pulse->require_subcommand(1);
    auto* synth = pulse->add_subcommand("synth", "synthesize a time-optimal phase profile");
    synth->add_option("gate", gate_name, "CZ or C2Z")->check(CLI::IsMember({"CZ", "C2Z"}));
    synth->add_option("--area", area, "pulse area (default: the gate's published area)");
    synth->add_option("--segments", segments, "spline segments (>= 16)");
    synth->add_option("--out", out_path, "output pulse file");
    auto* verify = pulse->add_subcommand("verify", "validate a pulse file");
    verify->add_option("path", pulse_path, "pulse file")->required();

    auto* presets = app.add_subcommand("presets", "platform presets");
    presets->add_subcommand("list", "list presets");

    auto* plot = app.add_subcommand("plot", "extract plot-ready data from a result table");
    plot->add_option("table", table_path, "result CSV")->required();
    plot->add_option("--figure", figure, "figure id (fig1d..fig3b)")->required();
    plot->add_option("--out", out_path, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? exit_config : exit_ok;
    }

    try {
        if (sim->parsed()) return cmd_simulate(config_path);
        if (sw->parsed()) {
            std::vector<double> values;
            std::stringstream ss(values_csv);
            std::string tok;
            while (std::getline(ss, tok, ',')) values.push_back(detail::to_double("--values", tok));
            return cmd_sweep(config_path, axis, values);
        }
        if (synth->parsed()) return cmd_pulse_synth(gate_name, area, segments, out_path);
        if (verify->parsed()) return cmd_pulse_verify(pulse_path);
        if (presets->parsed()) return cmd_presets_list();
        if (plot->parsed()) return cmd_plot(table_path, figure, out_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const NonConvergence& e) {
        std::cerr << "non-convergence: " << e.what() << '\n';
        return exit_nonconvergence;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    }
    return exit_config;
}
