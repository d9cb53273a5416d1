#pragma once

// Model file loading and writing.  Files are JSON documents of the form
// { "version": "dproc-1", "kind": <kind>, "body": { ... } } with a strict
// schema: unknown or missing fields, shape mismatches, and type errors are
// ParseErrors; semantic invariant violations are collected per validator.
//
// Body schemas (complex scalars are [re, im] pairs, matrices row-major
// arrays of rows):
//   mdp:        num_states, num_actions, transition [s][a][s'],
//               reward [s][a], gamma
//   goal_mdp:   num_states, num_actions, transition, goal
//   pomdp:      num_states, num_actions, num_obs, transition,
//               observation [s'][a][o], reward, b0, gamma
//   goal_pomdp: num_states, num_actions, num_obs, transition, observation,
//               b0, goal
//   qomdp:      dim, num_obs, actions (list of Kraus lists), rewards,
//               gamma, rho0
//   goal_qomdp: dim, num_obs, actions, rho0, rho_g
//   qmop:       dim, kraus

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dproc/classical.hpp"
#include "dproc/errors.hpp"
#include "dproc/numerics.hpp"
#include "dproc/quantum.hpp"
#include "dproc/reductions.hpp"

namespace dproc::io {

using dproc::numerics::ToleranceConfig;

using ModelVariant =
    std::variant<classical::Mdp, classical::GoalMdp, classical::Pomdp, classical::GoalPomdp,
                 quantum::Qomdp, quantum::GoalQomdp, reductions::QmopInstance>;

// A schema-correct model document plus any semantic invariant violations.
// `model` is absent only when a quantum state failed the density-matrix
// invariants and the typed value could not be assembled; the violations list
// then explains why.
struct ParsedModel {
    std::string kind;
    std::optional<ModelVariant> model;
    std::vector<Violation> violations;
};

// Throws ParseError on malformed JSON or schema errors.
ParsedModel parse_model_text(const std::string& text, const ToleranceConfig& tol = {});
ParsedModel parse_model_file(const std::string& path, const ToleranceConfig& tol = {});

// Parse + validate in one step: throws ValidationError when the model
// violates any invariant.
ModelVariant load_model(const std::string& path, const ToleranceConfig& tol = {});

// Shortest-width rendering with 17 significant digits, enough to round-trip
// any double exactly.
std::string format_real(double x);

// Full file documents (wrapper included), with keys in schema order and
// reals rendered by format_real, so identical models serialize identically.
std::string serialize_qomdp(const quantum::Qomdp& q);
std::string serialize_goal_qomdp(const quantum::GoalQomdp& q);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace dproc::io
