#pragma once

#include <optional>

#include "temsa/models/classifier.hpp"
#include "temsa/tems.hpp"

namespace temsa::models {

inline constexpr int kCheckpointFormatVersion = 1;

/// Builds an untrained classifier of `kind` from its config() JSON.
std::unique_ptr<Classifier> make_classifier(const std::string& kind, const nlohmann::json& config,
                                            std::uint64_t seed);

/// Writes `dir/manifest.json` (kind, config, tensor table, `extra`),
/// `dir/tensors.bin` (float64, little-endian, row-major, at the listed
/// offsets) and, when given, `dir/vocab.txt`.
void save_checkpoint(const std::string& dir, const Classifier& model, const nlohmann::json& extra = nlohmann::json::object(),
                     const tems::Vocabulary* vocab = nullptr);

struct LoadedCheckpoint {
    std::unique_ptr<Classifier> model;
    nlohmann::json manifest;
    std::optional<tems::Vocabulary> vocab;
};

/// Rebuilds the model and overwrites its parameters with the stored tensors.
/// With `partial`, parameters absent from the checkpoint keep their fresh
/// initialisation (pretrained encoder weights without a head); otherwise a
/// missing tensor is an error. Stored tensors the model lacks always error.
LoadedCheckpoint load_checkpoint(const std::string& dir, bool partial = false, std::uint64_t init_seed = 0);

}  // namespace temsa::models
