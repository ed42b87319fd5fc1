#pragma once

#include <string>
#include <vector>

#include "gptpinn/full_pinn.hpp"
#include "gptpinn/gpt.hpp"

namespace gptpinn {

/// Single-file archive: the 8 magic bytes "GPTPINN1", a little-endian u64
/// metadata length, a JSON metadata document, then every array as row-major
/// little-endian doubles in the order the metadata lists them.
///
/// The precomputed basis is not stored; loading rebuilds it from the
/// networks and the reduced set, which reproduces it bit for bit.
std::vector<char> encode_model(const GptModel& model);
GptModel decode_model(const std::vector<char>& bytes);

void save_model(const GptModel& model, const std::string& path);
GptModel load_model(const std::string& path);

/// Same container holding one trained network (used for reference caches).
std::vector<char> encode_full_pinn(const FullPinn& network);
FullPinn decode_full_pinn(const std::vector<char>& bytes);

void save_full_pinn(const FullPinn& network, const std::string& path);
FullPinn load_full_pinn(const std::string& path);

}  // namespace gptpinn
