#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "scarcegan/model.hpp"
#include "scarcegan/optim.hpp"

namespace scarcegan {

// Everything needed to resume or serve a trained model. Serialized as a
// little-endian binary file: 4-byte magic "SGAN", format version, a model
// header (head widths, tap index, class-name ordering), layer count, then
// per-layer shapes with row-major 64-bit parameters; optimizer and rng state
// follow. Round trips are bit-exact.
struct Checkpoint {
    Discriminator disc;
    std::optional<Generator> gen;
    std::optional<AdamState> disc_adam;
    std::optional<AdamState> gen_adam;
    std::uint64_t step = 0;
    std::string rng_state;  // text serialization of the training engine
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace scarcegan
