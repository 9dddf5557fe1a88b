#include "neon/rram/hardware_config.hpp"

#include <string>

#include "neon/common/error.hpp"

namespace neon::rram {

void HardwareConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) {
            throw Error("invalid hardware config: " + what);
        }
    };
    require(xbar_rows > 0 && xbar_cols > 0, "crossbar dimensions must be positive");
    require(cell_bits > 0 && cell_bits <= 8, "cell_bits must be in [1, 8]");
    require(value_bits > 1 && value_bits <= 32, "value_bits must be in [2, 32]");
    require(dac_bits > 0, "dac_bits must be positive");
    require(adc_per_subarray > 0, "adc_per_subarray must be positive");
    require(cycle_ns > 0.0, "cycle_ns must be positive");
    require(write_read_energy_ratio > 0.0, "write_read_energy_ratio must be positive");
    require(static_cast<std::size_t>(columns_per_kernel()) <= xbar_cols,
            "a kernel's bit slices must fit in one crossbar");
}

}  // namespace neon::rram
