#include "moss/model_io.hpp"

#include <fstream>
#include <sstream>

#include "moss/checkpoint.hpp"
#include "moss/errors.hpp"

namespace moss {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_model(const MossNet<float>& net, const std::filesystem::path& dir, const TaskSchema* schema) {
  std::filesystem::create_directories(dir);
  save_checkpoint(net.params(), dir / "model.ckpt");
  {
    std::ofstream out(dir / "config.json", std::ios::trunc);
    if (!out) throw ParseError("cannot write " + (dir / "config.json").string());
    out << net.config().to_json() << '\n';
  }
  net.vocab().save(dir / "vocab.txt");
  net.kb().save(dir / "kb.json");
  if (schema) schema->save(dir / "schema.json");
}

MossNet<float> load_model(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ParseError("model directory " + dir.string() + " does not exist");
  FrameworkConfig cfg = FrameworkConfig::from_json(read_file(dir / "config.json"));
  Vocab vocab = Vocab::load(dir / "vocab.txt");
  KnowledgeBase kb = KnowledgeBase::load(dir / "kb.json");
  auto params = load_checkpoint<float>(dir / "model.ckpt");
  return MossNet<float>(std::move(cfg), std::move(vocab), std::move(kb), std::move(params));
}

std::optional<TaskSchema> load_model_schema(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "schema.json")) return std::nullopt;
  return TaskSchema::load(dir / "schema.json");
}

}  // namespace moss
