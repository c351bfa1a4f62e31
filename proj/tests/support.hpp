#pragma once

#include <filesystem>
#include <random>

#include "ddsflow/cli.hpp"
#include "ddsflow/system.hpp"

namespace support {

using namespace ddsflow;

// Scratch directory, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  std::string str() const { return path.string(); }
};

// ---- independent expression reference ----------------------------------
// Single-pass evaluator over the raw text: its own tokenizer, no AST,
// written straight from the language contract. Used as the oracle for
// the main parse/eval pipeline.
//
// Result encoding: "true" / "false" / number (shortest form) /
// "\"<string>\"" / "ERROR". Normalize the main evaluator's repr with
// normalize_repr before comparing.
std::string ref_eval(const std::string& text, const doc::CanonicalDoc& d);
std::string normalize_repr(std::string repr);

// ---- random generators --------------------------------------------------
using Rng = std::mt19937_64;

doc::CanonicalDoc random_doc(Rng& rng, int depth = 0);

// Random AST respecting the grammar's precedence shape, so that
// parse(print(e)) == e by construction.
expr::ExprPtr random_expr(Rng& rng, int depth = 0);

// Random well-formed flat graph: <= max_acts activities, mixed AND/XOR
// blocks, optional loops. XOR guards have the form $o.pick == "<to>"
// so drivers can steer branches via the outcome document.
meta::WorkflowGraph random_graph(Rng& rng, int max_acts,
                                 double loop_prob = 0.2);

// Structure-editing mutation that keeps the graph well-formed
// (insert a pass-through node / splice one out / rename).
meta::WorkflowGraph mutate_graph(const meta::WorkflowGraph& g, Rng& rng);

// Drive an item through up to max_completes random legal completions.
// XOR branches are steered via the $o.pick attribute.
void random_run(System& sys, const std::string& item_id, Rng& rng,
                int max_completes);
void random_run(enact::Item& it, const meta::DescriptionRepo& repo, Rng& rng,
                int max_completes);

// Outcome doc steering an XOR split toward `target` (root "o").
doc::CanonicalDoc pick_doc(const std::string& target);

// ---- independent routing oracle -----------------------------------------
// Naive linear scan over (guard text, target) pairs using ref_eval.
std::string ref_route(
    const std::vector<std::pair<std::string, std::string>>& rules,
    const doc::CanonicalDoc& d);

// ---- small builders ------------------------------------------------------
meta::VersionRef publish_seq(System& sys, const std::string& name,
                             const std::vector<std::string>& acts);
eai::ConnectorSpec basic_connector(
    const std::string& inbound, bus::CommMode mode, doc::Format fmt,
    const std::vector<std::pair<std::string, std::string>>& transform,
    const std::vector<std::pair<std::string, std::string>>& routes);

}  // namespace support
