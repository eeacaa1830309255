#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flsa/experiments.hpp"
#include "flsa/flsa_solver.hpp"
#include "flsa/ic.hpp"
#include "flsa/signal_model.hpp"

namespace flsa {

// Round-trip-exact decimal rendering used by all CSV writers, so
// repeated runs produce byte-identical files.
std::string format_double(double v);

// Blocks CSV: header "L,U,level", one block per row.
std::vector<Block> read_blocks_csv(std::istream& in);
std::vector<Block> read_blocks_file(const std::string& path);
void write_blocks_csv(std::ostream& out, const std::vector<Block>& blocks);

// Sequence CSV: header "index,value", 1-based consecutive indices.
std::vector<double> read_sequence_csv(std::istream& in);
std::vector<double> read_sequence_file(const std::string& path);
void write_sequence_csv(std::ostream& out, std::span<const double> values);

// Sweep CSV: header "sigma,probability,stderr".
void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points);

// Breakpoints CSV: header "rank,lambda", descending penalties.
void write_breakpoints_csv(std::ostream& out, std::span<const double> breakpoints);

// Merge events CSV: header "lambda,boundary", one row per vanished
// boundary in event order.
void write_events_csv(std::ostream& out, const FusionPath& path);

nlohmann::json to_json(const ICReport& report);
nlohmann::json to_json(const StepwiseSignal& signal);
nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const RecoveryResult& result);

}  // namespace flsa
