#pragma once

#include <filesystem>
#include <optional>

#include "moss/net.hpp"
#include "moss/synth.hpp"

namespace moss {

// A model directory holds model.ckpt, config.json, vocab.txt, kb.json and,
// when known, schema.json.
void save_model(const MossNet<float>& net, const std::filesystem::path& dir, const TaskSchema* schema = nullptr);
MossNet<float> load_model(const std::filesystem::path& dir);
std::optional<TaskSchema> load_model_schema(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);

}  // namespace moss
