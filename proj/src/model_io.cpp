#include "dproc/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace dproc::io {

namespace {

using nlohmann::json;
using dproc::numerics::Complex;
using dproc::numerics::ComplexMatrix;
using quantum::DensityMatrix;
using quantum::Superoperator;

[[noreturn]] void fail(const std::string& msg) { throw ParseError(msg); }

void require_object_keys(const json& j, const std::string& where,
                         std::initializer_list<const char*> keys) {
    if (!j.is_object()) fail(where + " must be a JSON object");
    for (const char* key : keys) {
        if (!j.contains(key)) fail(where + " is missing field \"" + key + "\"");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* key : keys) {
            if (it.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) fail(where + " has unknown field \"" + it.key() + "\"");
    }
}

double read_real(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where + " must be a number");
    return j.get<double>();
}

std::size_t read_count(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where + " must be an integer");
    const auto value = j.get<long long>();
    if (value < 0) fail(where + " must be nonnegative");
    return static_cast<std::size_t>(value);
}

Complex read_complex(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) fail(where + " must be a [re, im] pair");
    return Complex(read_real(j[0], where + "[0]"), read_real(j[1], where + "[1]"));
}

ComplexMatrix read_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where + " must be a nonempty array of rows");
    const std::size_t rows = j.size();
    if (!j[0].is_array() || j[0].empty()) fail(where + "[0] must be a nonempty row");
    const std::size_t cols = j[0].size();
    ComplexMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const json& row = j[r];
        const std::string row_where = where + "[" + std::to_string(r) + "]";
        if (!row.is_array() || row.size() != cols) {
            fail(row_where + " must be a row of length " + std::to_string(cols));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            m.at(r, c) = read_complex(row[c], row_where + "[" + std::to_string(c) + "]");
        }
    }
    return m;
}

ComplexMatrix read_square_matrix(const json& j, std::size_t dim, const std::string& where) {
    const ComplexMatrix m = read_matrix(j, where);
    if (m.rows() != dim || m.cols() != dim) {
        fail(where + " must be " + std::to_string(dim) + "x" + std::to_string(dim));
    }
    return m;
}

std::vector<double> read_real_vector(const json& j, std::size_t len, const std::string& where) {
    if (!j.is_array() || j.size() != len) {
        fail(where + " must be an array of length " + std::to_string(len));
    }
    std::vector<double> out(len);
    for (std::size_t i = 0; i < len; ++i) {
        out[i] = read_real(j[i], where + "[" + std::to_string(i) + "]");
    }
    return out;
}

// Tables indexed [first][second] of fixed-length real rows.
std::vector<std::vector<std::vector<double>>> read_row_tensor(const json& j, std::size_t outer,
                                                              std::size_t inner,
                                                              std::size_t row_len,
                                                              const std::string& where) {
    if (!j.is_array() || j.size() != outer) {
        fail(where + " must be an array of length " + std::to_string(outer));
    }
    std::vector<std::vector<std::vector<double>>> out(outer);
    for (std::size_t i = 0; i < outer; ++i) {
        const json& mid = j[i];
        const std::string mid_where = where + "[" + std::to_string(i) + "]";
        if (!mid.is_array() || mid.size() != inner) {
            fail(mid_where + " must be an array of length " + std::to_string(inner));
        }
        out[i].resize(inner);
        for (std::size_t k = 0; k < inner; ++k) {
            out[i][k] = read_real_vector(mid[k], row_len, mid_where + "[" + std::to_string(k) + "]");
        }
    }
    return out;
}

std::vector<std::vector<double>> read_real_table(const json& j, std::size_t outer,
                                                 std::size_t inner, const std::string& where) {
    if (!j.is_array() || j.size() != outer) {
        fail(where + " must be an array of length " + std::to_string(outer));
    }
    std::vector<std::vector<double>> out(outer);
    for (std::size_t i = 0; i < outer; ++i) {
        out[i] = read_real_vector(j[i], inner, where + "[" + std::to_string(i) + "]");
    }
    return out;
}

classical::Mdp read_mdp(const json& body) {
    require_object_keys(body, "mdp body",
                        {"num_states", "num_actions", "transition", "reward", "gamma"});
    classical::Mdp m;
    m.num_states = read_count(body["num_states"], "num_states");
    m.num_actions = read_count(body["num_actions"], "num_actions");
    m.transition =
        read_row_tensor(body["transition"], m.num_states, m.num_actions, m.num_states,
                        "transition");
    m.reward = read_real_table(body["reward"], m.num_states, m.num_actions, "reward");
    m.gamma = read_real(body["gamma"], "gamma");
    return m;
}

classical::GoalMdp read_goal_mdp(const json& body) {
    require_object_keys(body, "goal_mdp body",
                        {"num_states", "num_actions", "transition", "goal"});
    classical::GoalMdp m;
    m.num_states = read_count(body["num_states"], "num_states");
    m.num_actions = read_count(body["num_actions"], "num_actions");
    m.transition =
        read_row_tensor(body["transition"], m.num_states, m.num_actions, m.num_states,
                        "transition");
    m.goal = read_count(body["goal"], "goal");
    return m;
}

classical::Pomdp read_pomdp(const json& body) {
    require_object_keys(body, "pomdp body",
                        {"num_states", "num_actions", "num_obs", "transition", "observation",
                         "reward", "b0", "gamma"});
    classical::Pomdp p;
    p.num_states = read_count(body["num_states"], "num_states");
    p.num_actions = read_count(body["num_actions"], "num_actions");
    p.num_obs = read_count(body["num_obs"], "num_obs");
    p.transition =
        read_row_tensor(body["transition"], p.num_states, p.num_actions, p.num_states,
                        "transition");
    p.observation =
        read_row_tensor(body["observation"], p.num_states, p.num_actions, p.num_obs,
                        "observation");
    p.reward = read_real_table(body["reward"], p.num_states, p.num_actions, "reward");
    p.b0 = classical::Belief{read_real_vector(body["b0"], p.num_states, "b0")};
    p.gamma = read_real(body["gamma"], "gamma");
    return p;
}

classical::GoalPomdp read_goal_pomdp(const json& body) {
    require_object_keys(body, "goal_pomdp body",
                        {"num_states", "num_actions", "num_obs", "transition", "observation",
                         "b0", "goal"});
    classical::GoalPomdp p;
    p.num_states = read_count(body["num_states"], "num_states");
    p.num_actions = read_count(body["num_actions"], "num_actions");
    p.num_obs = read_count(body["num_obs"], "num_obs");
    p.transition =
        read_row_tensor(body["transition"], p.num_states, p.num_actions, p.num_states,
                        "transition");
    p.observation =
        read_row_tensor(body["observation"], p.num_states, p.num_actions, p.num_obs,
                        "observation");
    p.b0 = classical::Belief{read_real_vector(body["b0"], p.num_states, "b0")};
    p.goal = read_count(body["goal"], "goal");
    return p;
}

std::vector<Superoperator> read_actions(const json& j, std::size_t dim, std::size_t num_obs,
                                        const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where + " must be a nonempty array of actions");
    std::vector<Superoperator> actions;
    actions.reserve(j.size());
    for (std::size_t a = 0; a < j.size(); ++a) {
        const json& kraus_list = j[a];
        const std::string a_where = where + "[" + std::to_string(a) + "]";
        if (!kraus_list.is_array() || kraus_list.size() != num_obs) {
            fail(a_where + " must list " + std::to_string(num_obs) + " Kraus matrices");
        }
        Superoperator action;
        action.dim = dim;
        for (std::size_t k = 0; k < num_obs; ++k) {
            action.kraus.push_back(
                read_square_matrix(kraus_list[k], dim, a_where + "[" + std::to_string(k) + "]"));
        }
        actions.push_back(std::move(action));
    }
    return actions;
}

// Builds a density matrix, diverting invariant violations (prefixed with the
// field name) into `out` instead of throwing.
std::optional<DensityMatrix> read_density(const json& j, std::size_t dim, const std::string& name,
                                          const ToleranceConfig& tol,
                                          std::vector<Violation>& out) {
    const ComplexMatrix m = read_square_matrix(j, dim, name);
    auto violations = DensityMatrix::check(m, tol);
    if (!violations.empty()) {
        for (Violation& v : violations) {
            out.push_back({name + " " + v.invariant, v.deviation});
        }
        return std::nullopt;
    }
    return DensityMatrix(m, tol);
}

ParsedModel read_qomdp(const json& body, const ToleranceConfig& tol) {
    require_object_keys(body, "qomdp body",
                        {"dim", "num_obs", "actions", "rewards", "gamma", "rho0"});
    const std::size_t dim = read_count(body["dim"], "dim");
    if (dim < 1) fail("dim must be at least 1");
    const std::size_t num_obs = read_count(body["num_obs"], "num_obs");
    if (num_obs < 1) fail("num_obs must be at least 1");

    ParsedModel parsed;
    parsed.kind = "qomdp";
    auto actions = read_actions(body["actions"], dim, num_obs, "actions");
    const json& rewards_json = body["rewards"];
    if (!rewards_json.is_array() || rewards_json.size() != actions.size()) {
        fail("rewards must list one matrix per action");
    }
    std::vector<ComplexMatrix> rewards;
    for (std::size_t a = 0; a < rewards_json.size(); ++a) {
        rewards.push_back(
            read_square_matrix(rewards_json[a], dim, "rewards[" + std::to_string(a) + "]"));
    }
    const double gamma = read_real(body["gamma"], "gamma");
    auto rho0 = read_density(body["rho0"], dim, "rho0", tol, parsed.violations);
    if (!rho0) return parsed;

    quantum::Qomdp q{dim, num_obs, std::move(actions), std::move(rewards), gamma,
                     std::move(*rho0)};
    parsed.violations = quantum::validate_qomdp(q, tol);
    parsed.model = std::move(q);
    return parsed;
}

ParsedModel read_goal_qomdp(const json& body, const ToleranceConfig& tol) {
    require_object_keys(body, "goal_qomdp body", {"dim", "num_obs", "actions", "rho0", "rho_g"});
    const std::size_t dim = read_count(body["dim"], "dim");
    if (dim < 1) fail("dim must be at least 1");
    const std::size_t num_obs = read_count(body["num_obs"], "num_obs");
    if (num_obs < 1) fail("num_obs must be at least 1");

    ParsedModel parsed;
    parsed.kind = "goal_qomdp";
    auto actions = read_actions(body["actions"], dim, num_obs, "actions");
    auto rho0 = read_density(body["rho0"], dim, "rho0", tol, parsed.violations);
    auto rho_g = read_density(body["rho_g"], dim, "rho_g", tol, parsed.violations);
    if (!rho0 || !rho_g) return parsed;

    quantum::GoalQomdp q{dim, num_obs, std::move(actions), std::move(*rho0), std::move(*rho_g)};
    parsed.violations = quantum::validate_goal_qomdp(q, tol);
    parsed.model = std::move(q);
    return parsed;
}

reductions::QmopInstance read_qmop(const json& body) {
    require_object_keys(body, "qmop body", {"dim", "kraus"});
    reductions::QmopInstance s;
    s.dim = read_count(body["dim"], "dim");
    if (s.dim < 1) fail("dim must be at least 1");
    const json& kraus = body["kraus"];
    if (!kraus.is_array() || kraus.empty()) fail("kraus must be a nonempty array");
    for (std::size_t k = 0; k < kraus.size(); ++k) {
        s.kraus.push_back(
            read_square_matrix(kraus[k], s.dim, "kraus[" + std::to_string(k) + "]"));
    }
    return s;
}

void append_real(std::string& out, double x) { out += format_real(x); }

void append_complex(std::string& out, const Complex& z) {
    out += '[';
    append_real(out, z.real());
    out += ',';
    append_real(out, z.imag());
    out += ']';
}

void append_matrix(std::string& out, const ComplexMatrix& m) {
    out += '[';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        if (r > 0) out += ',';
        out += '[';
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c > 0) out += ',';
            append_complex(out, m.at(r, c));
        }
        out += ']';
    }
    out += ']';
}

void append_actions(std::string& out, const std::vector<Superoperator>& actions) {
    out += '[';
    for (std::size_t a = 0; a < actions.size(); ++a) {
        if (a > 0) out += ',';
        out += '[';
        for (std::size_t k = 0; k < actions[a].kraus.size(); ++k) {
            if (k > 0) out += ',';
            append_matrix(out, actions[a].kraus[k]);
        }
        out += ']';
    }
    out += ']';
}

}  // namespace

ParsedModel parse_model_text(const std::string& text, const ToleranceConfig& tol) {
    json document;
    try {
        document = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    require_object_keys(document, "model file", {"version", "kind", "body"});
    if (!document["version"].is_string() || document["version"].get<std::string>() != "dproc-1") {
        fail("unsupported format version (expected \"dproc-1\")");
    }
    if (!document["kind"].is_string()) fail("kind must be a string");
    const std::string kind = document["kind"].get<std::string>();
    const json& body = document["body"];

    ParsedModel parsed;
    parsed.kind = kind;
    if (kind == "mdp") {
        classical::Mdp m = read_mdp(body);
        parsed.violations = classical::validate_mdp(m, tol);
        parsed.model = std::move(m);
    } else if (kind == "goal_mdp") {
        classical::GoalMdp m = read_goal_mdp(body);
        parsed.violations = classical::validate_goal_mdp(m, tol);
        parsed.model = std::move(m);
    } else if (kind == "pomdp") {
        classical::Pomdp p = read_pomdp(body);
        parsed.violations = classical::validate_pomdp(p, tol);
        parsed.model = std::move(p);
    } else if (kind == "goal_pomdp") {
        classical::GoalPomdp p = read_goal_pomdp(body);
        parsed.violations = classical::validate_goal_pomdp(p, tol);
        parsed.model = std::move(p);
    } else if (kind == "qomdp") {
        parsed = read_qomdp(body, tol);
    } else if (kind == "goal_qomdp") {
        parsed = read_goal_qomdp(body, tol);
    } else if (kind == "qmop") {
        reductions::QmopInstance s = read_qmop(body);
        parsed.violations = reductions::validate_qmop(s, tol);
        parsed.model = std::move(s);
    } else {
        fail("unknown model kind \"" + kind + "\"");
    }
    return parsed;
}

ParsedModel parse_model_file(const std::string& path, const ToleranceConfig& tol) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_model_text(buffer.str(), tol);
}

ModelVariant load_model(const std::string& path, const ToleranceConfig& tol) {
    ParsedModel parsed = parse_model_file(path, tol);
    if (!parsed.violations.empty() || !parsed.model) {
        throw ValidationError("model in " + path + " failed validation",
                              std::move(parsed.violations));
    }
    return std::move(*parsed.model);
}

std::string format_real(double x) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", x);
    return buffer;
}

std::string serialize_qomdp(const quantum::Qomdp& q) {
    std::string out = "{\"version\":\"dproc-1\",\"kind\":\"qomdp\",\"body\":{";
    out += "\"dim\":" + std::to_string(q.dim);
    out += ",\"num_obs\":" + std::to_string(q.num_obs);
    out += ",\"actions\":";
    append_actions(out, q.actions);
    out += ",\"rewards\":[";
    for (std::size_t a = 0; a < q.rewards.size(); ++a) {
        if (a > 0) out += ',';
        append_matrix(out, q.rewards[a]);
    }
    out += "],\"gamma\":";
    append_real(out, q.gamma);
    out += ",\"rho0\":";
    append_matrix(out, q.rho0.mat());
    out += "}}\n";
    return out;
}

std::string serialize_goal_qomdp(const quantum::GoalQomdp& q) {
    std::string out = "{\"version\":\"dproc-1\",\"kind\":\"goal_qomdp\",\"body\":{";
    out += "\"dim\":" + std::to_string(q.dim);
    out += ",\"num_obs\":" + std::to_string(q.num_obs);
    out += ",\"actions\":";
    append_actions(out, q.actions);
    out += ",\"rho0\":";
    append_matrix(out, q.rho0.mat());
    out += ",\"rho_g\":";
    append_matrix(out, q.rho_g.mat());
    out += "}}\n";
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open file for writing: " + path);
    out << text;
    if (!out) throw Error("failed writing file: " + path);
}

}  // namespace dproc::io
