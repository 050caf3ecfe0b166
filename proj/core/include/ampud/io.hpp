#pragma once

#include <string>
#include <vector>

#include "ampud/amp.hpp"
#include "ampud/model.hpp"
#include "ampud/state_evolution.hpp"

namespace ampud {

inline constexpr const char* kSchemaVersion = "ampud-1";

/// Flat binary layout: little-endian 64-bit floats, row-major.
void write_matrix_bin(const std::string& path, const Matrix& m);
void write_vector_bin(const std::string& path, const Vector& v);
Vector read_vector_bin(const std::string& path);

void write_matrix_csv(const std::string& path, const Matrix& m);
void write_vector_csv(const std::string& path, const Vector& v);

/// AMP trace CSV: header + rows (t, sigma_hat_sq, mse_if_known).
void write_amp_trace_csv(const std::string& path,
                         const std::vector<AmpTraceRow>& trace);

/// SE trace CSV: header + rows (t, sigma_sq, predicted_mse), column-aligned
/// with the AMP trace for overlay plotting.
void write_se_trace_csv(const std::string& path, const SeTrace& trace);

}  // namespace ampud
