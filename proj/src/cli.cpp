#include "dproc/cli.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "dproc/classical.hpp"
#include "dproc/errors.hpp"
#include "dproc/model_io.hpp"
#include "dproc/quantum.hpp"
#include "dproc/reductions.hpp"
#include "dproc/solvers.hpp"

namespace dproc::cli {

namespace {

using classical::GoalMdp;
using classical::GoalPomdp;
using classical::Pomdp;
using io::format_real;
using quantum::GoalQomdp;
using quantum::Qomdp;
using reductions::ActionSequence;
using reductions::QmopInstance;
using solvers::Decision;
using solvers::PolicyTree;
using solvers::ReachabilityVerdict;

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

std::string violations_json(const std::vector<Violation>& violations) {
    std::string out = "[";
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i > 0) out += ',';
        out += "{\"invariant\":\"" + json_escape(violations[i].invariant) + "\",\"deviation\":" +
               format_real(violations[i].deviation) + "}";
    }
    out += ']';
    return out;
}

std::string sequence_json(const std::vector<std::size_t>& indices) {
    std::string out = "[";
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(indices[i]);
    }
    out += ']';
    return out;
}

std::string tree_json(const PolicyTree& tree) {
    std::string out = "{\"action\":" + std::to_string(tree.action) + ",\"children\":[";
    for (std::size_t i = 0; i < tree.children.size(); ++i) {
        if (i > 0) out += ',';
        out += '[' + std::to_string(tree.children[i].first) + ',' +
               tree_json(tree.children[i].second) + ']';
    }
    out += "]}";
    return out;
}

std::string support_witness_json(const ReachabilityVerdict& verdict) {
    std::string out = "{\"supports\":[";
    for (std::size_t i = 0; i < verdict.supports.size(); ++i) {
        if (i > 0) out += ',';
        out += '[';
        const auto& bits = verdict.supports[i].bits;
        for (std::size_t b = 0; b < bits.size(); ++b) {
            if (b > 0) out += ',';
            out += bits[b] ? '1' : '0';
        }
        out += ']';
    }
    out += "],\"actions\":" + sequence_json(verdict.witness->action_for_state) + "}";
    return out;
}

// Either the literal "witness" or a comma-separated list of 1-based indices.
struct PolicySpec {
    bool use_witness = false;
    std::vector<std::size_t> sequence;
};

PolicySpec parse_policy(const std::string& text) {
    PolicySpec spec;
    if (text == "witness") {
        spec.use_witness = true;
        return spec;
    }
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string token = text.substr(pos, comma - pos);
        if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos) {
            throw ParseError(
                "--policy must be \"witness\" or a comma-separated list of 1-based indices");
        }
        const unsigned long long value = std::stoull(token);
        if (value < 1) throw ParseError("--policy indices are 1-based");
        spec.sequence.push_back(static_cast<std::size_t>(value));
        pos = comma + 1;
    }
    return spec;
}

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

int cmd_validate(const std::string& file, Streams io) {
    const io::ParsedModel parsed = io::parse_model_file(file);
    const bool valid = parsed.violations.empty() && parsed.model.has_value();
    io.out << "{\"valid\":" << (valid ? "true" : "false")
           << ",\"violations\":" << violations_json(parsed.violations) << "}\n";
    return 0;
}

int simulate_goal_pomdp(const GoalPomdp& p, const PolicySpec& policy, std::size_t steps,
                        std::size_t trials, std::uint64_t seed, Streams io) {
    solvers::EstimateResult estimate;
    if (policy.use_witness) {
        const ReachabilityVerdict verdict = solvers::decide_goal_reachability_pomdp(p);
        if (verdict.decided != Decision::yes) {
            io.err << "error: the model has no reachability witness to simulate "
                      "(decide-reach answers no)\n";
            return 2;
        }
        estimate = solvers::estimate_goal_probability(p, verdict.supports, *verdict.witness,
                                                      steps, trials, seed);
    } else {
        estimate = solvers::estimate_goal_probability(p, ActionSequence{policy.sequence}, steps,
                                                      trials, seed);
    }
    io.out << "{\"probability\":" << format_real(estimate.probability)
           << ",\"std_error\":" << format_real(estimate.std_error) << ",\"trials\":"
           << estimate.trials << ",\"steps\":" << steps << "}\n";
    return 0;
}

int cmd_simulate(const std::string& file, const std::string& policy_text, std::size_t steps,
                 std::size_t trials, std::uint64_t seed, Streams io) {
    const io::ModelVariant model = io::load_model(file);
    const PolicySpec policy = parse_policy(policy_text);
    if (const auto* q = std::get_if<GoalQomdp>(&model)) {
        if (policy.use_witness) {
            throw ParseError("--policy witness applies only to classical goal models");
        }
        const auto estimate = solvers::estimate_goal_probability(
            *q, ActionSequence{policy.sequence}, steps, trials, seed);
        io.out << "{\"probability\":" << format_real(estimate.probability)
               << ",\"std_error\":" << format_real(estimate.std_error) << ",\"trials\":"
               << estimate.trials << ",\"steps\":" << steps << "}\n";
        return 0;
    }
    if (const auto* p = std::get_if<GoalPomdp>(&model)) {
        return simulate_goal_pomdp(*p, policy, steps, trials, seed, io);
    }
    if (const auto* m = std::get_if<GoalMdp>(&model)) {
        return simulate_goal_pomdp(classical::goal_mdp_to_goal_pomdp(*m, 0), policy, steps,
                                   trials, seed, io);
    }
    io.err << "error: simulate requires a goal_pomdp, goal_mdp, or goal_qomdp model\n";
    return 2;
}

int cmd_solve(const std::string& file, std::size_t horizon, std::optional<double> threshold,
              Streams io) {
    const io::ModelVariant model = io::load_model(file);
    solvers::BestPolicyResult best;
    if (const auto* p = std::get_if<Pomdp>(&model)) {
        best = solvers::best_policy_value(*p, horizon);
    } else if (const auto* q = std::get_if<Qomdp>(&model)) {
        best = solvers::best_policy_value(*q, horizon);
    } else {
        io.err << "error: solve requires a pomdp or qomdp model\n";
        return 2;
    }
    std::string report = "{";
    if (threshold) {
        const bool exists = best.value >= *threshold - numerics::ToleranceConfig{}.eps_zero;
        report += std::string("\"decided\":\"") + (exists ? "yes" : "no") + "\",";
    }
    report += "\"value\":" + format_real(best.value);
    report += ",\"witness\":" + tree_json(best.tree);
    report += ",\"nodes_expanded\":" + std::to_string(best.nodes_expanded) + "}";
    io.out << report << "\n";
    return 0;
}

void report_classical_reach(const ReachabilityVerdict& verdict, Streams io) {
    std::string report = "{\"decided\":\"";
    report += verdict.decided == Decision::yes ? "yes" : "no";
    report += '"';
    if (verdict.witness) report += ",\"witness\":" + support_witness_json(verdict);
    report += ",\"nodes_expanded\":" + std::to_string(verdict.nodes_expanded) + "}";
    io.out << report << "\n";
}

int cmd_decide_reach(const std::string& file, std::optional<std::size_t> depth, Streams io) {
    const io::ModelVariant model = io::load_model(file);
    if (const auto* q = std::get_if<GoalQomdp>(&model)) {
        const ReachabilityVerdict verdict =
            solvers::decide_goal_reachability_qomdp_bounded(*q, depth.value_or(8));
        std::string report = "{\"decided\":\"";
        report += verdict.decided == Decision::yes ? "yes" : "unknown";
        report += '"';
        if (verdict.sequence_witness) {
            report += ",\"witness\":" + sequence_json(verdict.sequence_witness->indices);
        }
        report += ",\"nodes_expanded\":" + std::to_string(verdict.nodes_expanded);
        if (verdict.decided == Decision::unknown) {
            report += ",\"bound_used\":" + std::to_string(verdict.bound_used);
        }
        report += "}";
        io.out << report << "\n";
        return 0;
    }
    if (depth) {
        io.err << "error: --depth applies only to goal_qomdp models\n";
        return 2;
    }
    if (const auto* p = std::get_if<GoalPomdp>(&model)) {
        report_classical_reach(solvers::decide_goal_reachability_pomdp(*p), io);
        return 0;
    }
    if (const auto* m = std::get_if<GoalMdp>(&model)) {
        report_classical_reach(
            solvers::decide_goal_reachability_pomdp(classical::goal_mdp_to_goal_pomdp(*m, 0)),
            io);
        return 0;
    }
    io.err << "error: decide-reach requires a goal_pomdp, goal_mdp, or goal_qomdp model\n";
    return 2;
}

int cmd_reduce_qmop(const std::string& file, const std::string& out_path, Streams io) {
    const io::ModelVariant model = io::load_model(file);
    const auto* s = std::get_if<QmopInstance>(&model);
    if (s == nullptr) {
        io.err << "error: reduce-qmop requires a qmop model\n";
        return 2;
    }
    const GoalQomdp q = reductions::qmop_to_goal_qomdp(*s);
    io::write_text_file(out_path, io::serialize_goal_qomdp(q));
    io.out << "{\"written\":\"" << json_escape(out_path) << "\",\"dim\":" << q.dim
           << ",\"num_obs\":" << q.num_obs << "}\n";
    return 0;
}

int cmd_qmop_search(const std::string& file, std::size_t max_len, Streams io) {
    const io::ModelVariant model = io::load_model(file);
    const auto* s = std::get_if<QmopInstance>(&model);
    if (s == nullptr) {
        io.err << "error: qmop-search requires a qmop model\n";
        return 2;
    }
    const auto found = reductions::qmop_bounded_search(*s, max_len);
    if (found) {
        io.out << "{\"decided\":\"yes\",\"witness\":" << sequence_json(found->indices) << "}\n";
    } else {
        io.out << "{\"decided\":\"unknown\",\"bound_used\":" << max_len << "}\n";
    }
    return 0;
}

int cmd_embed(const std::string& file, const std::string& out_path, Streams io) {
    const io::ModelVariant model = io::load_model(file);
    const auto* p = std::get_if<Pomdp>(&model);
    if (p == nullptr) {
        io.err << "error: embed requires a pomdp model\n";
        return 2;
    }
    const Qomdp q = reductions::embed_pomdp(*p);
    io::write_text_file(out_path, io::serialize_qomdp(q));
    io.out << "{\"written\":\"" << json_escape(out_path) << "\",\"dim\":" << q.dim
           << ",\"num_obs\":" << q.num_obs << "}\n";
    return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"decision processes over classical and quantum state spaces", "dproc"};
    app.require_subcommand(1);

    std::string file;
    std::string out_path;
    std::string policy_text;
    std::size_t steps = 0;
    std::size_t trials = 0;
    std::size_t horizon = 0;
    std::size_t max_len = 0;
    std::size_t depth = 0;
    std::uint64_t seed = 0;
    double threshold = 0.0;

    CLI::App* validate = app.add_subcommand("validate", "Check a model file");
    validate->add_option("file", file, "model file")->required();

    CLI::App* simulate = app.add_subcommand("simulate", "Estimate goal probability");
    simulate->add_option("file", file, "goal model file")->required();
    simulate->add_option("--policy", policy_text, "\"witness\" or 1-based action list")
        ->required();
    simulate->add_option("--steps", steps, "steps per trajectory")->required();
    simulate->add_option("--trials", trials, "number of trajectories")->required();
    simulate->add_option("--seed", seed, "master seed (default 0)");

    CLI::App* solve = app.add_subcommand("solve", "Optimal finite-horizon policy value");
    solve->add_option("file", file, "pomdp or qomdp file")->required();
    solve->add_option("--horizon", horizon, "policy tree depth")->required();
    CLI::Option* threshold_option =
        solve->add_option("--threshold", threshold, "policy existence threshold");

    CLI::App* decide = app.add_subcommand("decide-reach", "Goal reachability");
    decide->add_option("file", file, "goal model file")->required();
    CLI::Option* depth_option =
        decide->add_option("--depth", depth, "search depth for quantum models (default 8)");

    CLI::App* reduce = app.add_subcommand("reduce-qmop", "Build the goal model of an instance");
    reduce->add_option("file", file, "qmop file")->required();
    reduce->add_option("--out", out_path, "output goal_qomdp file")->required();

    CLI::App* search = app.add_subcommand("qmop-search", "Bounded null-sequence search");
    search->add_option("file", file, "qmop file")->required();
    search->add_option("--max-len", max_len, "maximum sequence length")->required();

    CLI::App* embed = app.add_subcommand("embed", "Quantum embedding of a classical model");
    embed->add_option("file", file, "pomdp file")->required();
    embed->add_option("--out", out_path, "output qomdp file")->required();

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("dproc");
    for (const std::string& arg : args) argv.push_back(arg.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    const Streams io{out, err};
    try {
        if (app.got_subcommand(validate)) return cmd_validate(file, io);
        if (app.got_subcommand(simulate)) {
            return cmd_simulate(file, policy_text, steps, trials, seed, io);
        }
        if (app.got_subcommand(solve)) {
            std::optional<double> maybe_threshold;
            if (threshold_option->count() > 0) maybe_threshold = threshold;
            return cmd_solve(file, horizon, maybe_threshold, io);
        }
        if (app.got_subcommand(decide)) {
            std::optional<std::size_t> maybe_depth;
            if (depth_option->count() > 0) maybe_depth = depth;
            return cmd_decide_reach(file, maybe_depth, io);
        }
        if (app.got_subcommand(reduce)) return cmd_reduce_qmop(file, out_path, io);
        if (app.got_subcommand(search)) return cmd_qmop_search(file, max_len, io);
        if (app.got_subcommand(embed)) return cmd_embed(file, out_path, io);
        throw UnknownCommand("no command matched");
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        for (const Violation& v : e.violations) {
            err << "  violated: " << v.invariant << " (deviation " << format_real(v.deviation)
                << ")\n";
        }
        return 2;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const NotEmbeddable& e) {
        err << "error: " << e.what() << " (deviation " << format_real(e.deviation) << ")\n";
        return 2;
    } catch (const IndexOutOfRange& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const EmptySequence& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const UnknownCommand& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const BudgetExceeded& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    } catch (const StateBudgetExceeded& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace dproc::cli
