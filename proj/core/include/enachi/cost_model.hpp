#pragma once

namespace enachi {

// Per-device computation cost model. Workloads are in MACs, frequencies in
// Hz (MACs per second), energies in J.

/// R / f. Throws std::invalid_argument for R < 0 or f <= 0.
[[nodiscard]] double local_delay(double workload_macs, double cpu_hz);

/// alpha * f^2 * R, equivalently alpha * f^3 * local_delay(R, f).
[[nodiscard]] double local_energy(double chip_alpha, double cpu_hz, double workload_macs);

/// R_edge / f_edge.
[[nodiscard]] double edge_delay(double workload_macs, double edge_hz);

}  // namespace enachi
