#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "moss/corpus.hpp"
#include "moss/kb.hpp"
#include "moss/nn.hpp"
#include "moss/params.hpp"
#include "moss/tape.hpp"
#include "moss/vocab.hpp"

namespace moss {

struct MaxLen {
  int m = 40;
  int s = 40;
  int a = 40;
  int r = 60;
  int of(Module mod) const;
};

// Which decoders exist and the network dimensions. DST and NLG are always present.
struct FrameworkConfig {
  bool has_nlu = true;
  bool has_dpl = true;
  int d_emb = 50;
  int d_hid = 50;
  int vocab_size = kDefaultVocabLimit;
  int kb_dim = kMatchBuckets;
  double dropout = 0.5;
  MaxLen max_len;
  std::uint64_t seed = 1;
  // Half-widths of the uniform initialization: the shared embedding and
  // every other weight matrix. Biases start at zero.
  double embed_init = 0.5;
  double init_range = 0.3;
  // NLG attends over DPL hidden states instead of embedded act tokens.
  bool nlg_attends_act_states = false;
  // Also drop the fed-back decoder input embedding, not just the output features.
  bool dropout_inputs = false;

  void validate() const;
  bool has(Module m) const;
  std::vector<Module> modules() const;

  // "all", "wo_nlu", "wo_dpl", "wo_nlu_dpl".
  static FrameworkConfig instance(std::string_view name);
  std::string instance_name() const;

  std::string to_json() const;
  static FrameworkConfig from_json(const std::string& text);
};

// How one decoder is wired: what it attends over, where h0 comes from, and
// whether its input embeddings carry k_t.
struct ModuleWiring {
  Module module = Module::dst;
  std::vector<std::string> memory;  // "B~", "R~", "U~", "M~", "S~", "A", "A~"
  std::string h0_from;              // "encoder" or an upstream module name
  bool kb_conditioned = false;
  bool operator==(const ModuleWiring&) const = default;
};

std::vector<ModuleWiring> expected_wiring(const FrameworkConfig& cfg);

// Vocabulary extended with the out-of-vocabulary words of one turn's copy
// sources. Ids >= vocab size denote those words.
class OovTable {
 public:
  explicit OovTable(const Vocab& vocab) : vocab_(&vocab) {}
  // Vocabulary id, or a new/existing extended id for an OOV word.
  int add(const std::string& word);
  // Vocabulary id, extended id if already added, otherwise UNK.
  int lookup(const std::string& word) const;
  const std::string& word(int ext_id) const;
  int size() const { return vocab_->size() + static_cast<int>(words_.size()); }
  int input_id(int ext_id) const { return ext_id < vocab_->size() ? ext_id : tok::unk; }
  const Vocab& vocab() const { return *vocab_; }

 private:
  const Vocab* vocab_;
  std::vector<std::string> words_;
};

template <typename T>
struct EncoderStates {
  std::vector<Var<T>> b;  // B~_{t-1}
  std::vector<Var<T>> r;  // R~_{t-1}
  std::vector<Var<T>> u;  // U~_t
  Var<T> h_E;
};

template <typename T>
struct DecodeResult {
  std::vector<int> tokens;  // extended ids; ends with the module EOS unless truncated
  std::vector<Var<T>> hidden;
  std::vector<Var<T>> gen_logits;
  std::vector<Var<T>> copy_scores;
  std::vector<Var<T>> attention;
  std::vector<int> copy_source;  // extended id of each attended position
  std::vector<Var<T>> step_nll;  // teacher forcing only
  bool truncated = false;

  Var<T> last_hidden() const { return hidden.back(); }
  // Probability of every extended id at `step`; copy mass of identical
  // surface tokens is summed into one entry.
  std::vector<T> distribution(std::size_t step, int ext_size, int vocab_size) const;
  // Generation-only and copy-only parts of the joint softmax at `step`.
  T generation_probability(std::size_t step, int vocab_id) const;
  T copy_probability(std::size_t step, int ext_id) const;
};

template <typename T>
struct ModuleOutput {
  DecodeResult<T> decode;
  Tokens words;  // surface tokens without EOS
  bool teacher_forced = false;
  Var<T> loss;  // mean per-token NLL when teacher forced
};

template <typename T>
struct TurnOutput {
  std::array<std::optional<ModuleOutput<T>>, 4> modules;
  std::array<Var<T>, 4> h0;
  MatchDegree k;
  std::vector<ModuleWiring> wiring;
  EncoderStates<T> encoder;
  OovTable oov;

  explicit TurnOutput(const Vocab& v) : oov(v) {}
  const ModuleOutput<T>* get(Module m) const {
    const auto& o = modules[static_cast<std::size_t>(module_index(m))];
    return o ? &*o : nullptr;
  }
  PredictedTurn prediction() const;
};

// Gold targets per module; nullptr means the module decodes free-running.
struct TurnTeacher {
  std::array<const Tokens*, 4> gold{};
  const Tokens*& operator[](Module m) { return gold[static_cast<std::size_t>(module_index(m))]; }
  const Tokens* operator[](Module m) const { return gold[static_cast<std::size_t>(module_index(m))]; }
};

struct RunContext {
  bool training = false;
  double dropout = 0.0;
  std::mt19937_64 rng{0};
};

template <typename T>
class MossNet {
 public:
  MossNet(FrameworkConfig cfg, Vocab vocab, KnowledgeBase kb);
  MossNet(FrameworkConfig cfg, Vocab vocab, KnowledgeBase kb, ParameterStore<T> params);

  // All parameters of an instance, registered but not initialized.
  static ParameterStore<T> make_parameters(const FrameworkConfig& cfg);

  const FrameworkConfig& config() const { return cfg_; }
  const Vocab& vocab() const { return vocab_; }
  const KnowledgeBase& kb() const { return kb_; }
  ParameterStore<T>& params() { return params_; }
  const ParameterStore<T>& params() const { return params_; }

  // Bidirectional GRU over [B; R; U]; per-token state is the sum of both
  // directions and h_E is the state at the final position.
  EncoderStates<T> encode(Tape<T>& tape, const std::vector<int>& b, const std::vector<int>& r,
                          const std::vector<int>& u) const;

  struct Memory {
    std::vector<Var<T>> rows;
    std::vector<int> copy_source;
  };

  // Attention + copy GRU decoder. `teacher` holds extended target ids
  // including the trailing EOS; without it decoding is greedy.
  DecodeResult<T> decode_module(Tape<T>& tape, Module module, const Memory& memory, Var<T> h0,
                                const std::vector<int>* teacher, const MatchDegree* kb, const OovTable& oov,
                                RunContext& ctx) const;

  TurnOutput<T> forward_turn(Tape<T>& tape, const TurnInput& input, const TurnTeacher* teacher, RunContext& ctx) const;

  // Turn recurrence through B_t. With teacher_forcing, annotated modules are
  // teacher forced (training); otherwise every module decodes free-running.
  std::vector<TurnOutput<T>> run_dialog(Tape<T>& tape, const Dialog& dialog, Source source, RunContext& ctx,
                                        bool teacher_forcing) const;

 private:
  void check_parameters() const;

  FrameworkConfig cfg_;
  Vocab vocab_;
  KnowledgeBase kb_;
  ParameterStore<T> params_;
};

extern template class MossNet<float>;
extern template class MossNet<double>;

}  // namespace moss
