#pragma once

#include <cstddef>
#include <cstdint>
#include <set>

#include "neon/graph/op_kind.hpp"

namespace neon::rram {

/// Crossbar geometry and precision of the target substrate.
struct HardwareConfig {
    std::size_t xbar_rows = 128;
    std::size_t xbar_cols = 128;
    int cell_bits = 2;
    int value_bits = 16;
    int dac_bits = 1;
    std::size_t adc_per_subarray = 8;
    double cycle_ns = 10.0;
    double write_read_energy_ratio = 1000.0;
    // Ops executed by fixed-function logic next to the crossbars.
    std::set<graph::OpTag> supported_dlc_ops = {
        graph::OpTag::tanh,  graph::OpTag::mul_elementwise, graph::OpTag::affine,
        graph::OpTag::clamp, graph::OpTag::identity,        graph::OpTag::reshape,
    };
    // LUTs above this size are reported infeasible.
    std::uint64_t lut_cap_bytes = std::uint64_t{1} << 30;

    /// ceil(value_bits / cell_bits)
    int columns_per_kernel() const { return (value_bits + cell_bits - 1) / cell_bits; }
    /// DAC streams dac_bits per cycle.
    int input_cycles() const { return (value_bits + dac_bits - 1) / dac_bits; }
    std::uint64_t subarray_capacity_bytes() const {
        return static_cast<std::uint64_t>(xbar_rows) * xbar_cols * cell_bits / 8;
    }

    /// Throws neon::Error on a non-positive field or an impossible geometry.
    void validate() const;
};

}  // namespace neon::rram
