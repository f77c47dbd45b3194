#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "vpkit/augment.hpp"
#include "vpkit/trainer.hpp"

namespace vpkit {

/// Flat `key=value` lines; blank lines and `#` comments ignored. Duplicate keys are an error.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& is);
KeyValues read_key_values_file(const std::filesystem::path& p);

/// Keys are TrainConfig field names plus `loss` (sm|wsm), `sigma`,
/// `variant` (squared|literal) and `truncation_radius`. Unknown keys throw.
void apply_train_config(const KeyValues& kv, TrainConfig& cfg);

/// Keys are AugmentConfig field names; `occlusion_source` is uniform|corpus.
void apply_augment_config(const KeyValues& kv, AugmentConfig& cfg);

}  // namespace vpkit
