#pragma once

#include <filesystem>

#include "adsurv/model.hpp"

namespace adsurv {

struct Checkpoint {
  ModelSpec spec;
  ModelState state;
};

// Raw little-endian binary format ("ADSV", version 1); round-trips bit-exact.
void save_checkpoint_binary(const std::filesystem::path& path,
                            const ModelSpec& spec, const ModelState& state);
Checkpoint load_checkpoint_binary(const std::filesystem::path& path);

// JSON alternative for inspection/interop; round-trips to full double
// precision via shortest-representation serialization.
void save_checkpoint_json(const std::filesystem::path& path,
                          const ModelSpec& spec, const ModelState& state);
Checkpoint load_checkpoint_json(const std::filesystem::path& path);

// Dispatches on the ".json" extension, binary otherwise.
void save_checkpoint(const std::filesystem::path& path, const ModelSpec& spec,
                     const ModelState& state);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace adsurv
