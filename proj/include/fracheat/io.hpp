#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "fracheat/fracode.hpp"
#include "fracheat/pdesolver.hpp"
#include "fracheat/verify.hpp"

namespace fracheat {

/// %.15g; "nan", "inf" and "-inf" for non-finite values.
std::string format_number(double v);

/// JSON number rounded to 15 significant digits; null when non-finite.
nlohmann::json json_number(double v);
nlohmann::json json_number(const std::optional<double>& v);

/// Columns t, dt, max_u, u_at_x0, u_at_x1, mass, newton_iters; one row per level.
void write_run_csv(std::ostream& out, const RunHistory& history);

/// First row: mesh nodes. Then every `stride`-th level (and the last) as t, u_0..u_{nx-1}.
void write_snapshots_csv(std::ostream& out, const RunHistory& history, std::size_t stride);

/// Columns t, n, dt.
void write_fode_csv(std::ostream& out, const FodeResult& result);

nlohmann::json to_json(const BlowUpReport& report);
nlohmann::json to_json(const SolverConfig& cfg);
nlohmann::json to_json(const CheckRecord& check);
nlohmann::json to_json(const SuiteTolerances& tol);
nlohmann::json to_json(const VerificationReport& report);

/// Two-space indented dump with a trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace fracheat
