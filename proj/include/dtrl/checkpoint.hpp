#pragma once

#include <cstdint>
#include <string>

#include "dtrl/param_store.hpp"

namespace dtrl::nn {

// Checkpoint layout: an ASCII header manifest, one line per entry with name,
// shape and byte offset into the payload, then raw little-endian float32.
//
//   DTRL-CKPT 1
//   count <n>
//   <name> <rows> <cols> <offset>
//   ...
//   data <payload-bytes>
//   <payload>
void save_checkpoint(const std::string& path, const ParamStore<float>& params);

// Fills an existing store; every manifest entry must match a present
// parameter's shape (and vice versa), otherwise ValidationError.
void load_checkpoint(const std::string& path, ParamStore<float>& params);

// FNV-1a over the file's bytes; used by manifests and by the probe
// no-mutation assertion.
std::uint64_t file_content_hash(const std::string& path);

}  // namespace dtrl::nn
