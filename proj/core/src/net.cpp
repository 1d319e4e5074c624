#include "moss/net.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <set>

#include "moss/errors.hpp"
#include "moss/ops.hpp"

namespace moss {

int MaxLen::of(Module mod) const {
  switch (mod) {
    case Module::nlu: return m;
    case Module::dst: return s;
    case Module::dpl: return a;
    case Module::nlg: return r;
  }
  return r;
}

void FrameworkConfig::validate() const {
  if (d_emb <= 0 || d_hid <= 0 || vocab_size <= tok::num_reserved || kb_dim < 2) {
    throw ContractError("framework config: dimensions must be positive and vocab_size above the reserved tokens");
  }
  if (!(embed_init > 0.0) || !(init_range > 0.0)) throw ContractError("framework config: init ranges must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ContractError("framework config: dropout must be in [0, 1)");
  if (max_len.m <= 0 || max_len.s <= 0 || max_len.a <= 0 || max_len.r <= 0) {
    throw ContractError("framework config: max_len entries must be positive");
  }
}

bool FrameworkConfig::has(Module m) const {
  switch (m) {
    case Module::nlu: return has_nlu;
    case Module::dpl: return has_dpl;
    default: return true;
  }
}

std::vector<Module> FrameworkConfig::modules() const {
  std::vector<Module> out;
  for (Module m : kAllModules)
    if (has(m)) out.push_back(m);
  return out;
}

FrameworkConfig FrameworkConfig::instance(std::string_view name) {
  FrameworkConfig c;
  if (name == "all") return c;
  if (name == "wo_nlu") {
    c.has_nlu = false;
  } else if (name == "wo_dpl") {
    c.has_dpl = false;
  } else if (name == "wo_nlu_dpl") {
    c.has_nlu = false;
    c.has_dpl = false;
  } else {
    throw ContractError("unknown framework instance '" + std::string(name) + "' (all|wo_nlu|wo_dpl|wo_nlu_dpl)");
  }
  return c;
}

std::string FrameworkConfig::instance_name() const {
  if (has_nlu && has_dpl) return "all";
  if (!has_nlu && has_dpl) return "wo_nlu";
  if (has_nlu && !has_dpl) return "wo_dpl";
  return "wo_nlu_dpl";
}

std::string FrameworkConfig::to_json() const {
  nlohmann::ordered_json j;
  j["has_nlu"] = has_nlu;
  j["has_dpl"] = has_dpl;
  j["d_emb"] = d_emb;
  j["d_hid"] = d_hid;
  j["vocab_size"] = vocab_size;
  j["kb_dim"] = kb_dim;
  j["dropout"] = dropout;
  j["max_len"] = {{"m", max_len.m}, {"s", max_len.s}, {"a", max_len.a}, {"r", max_len.r}};
  j["seed"] = seed;
  j["embed_init"] = embed_init;
  j["init_range"] = init_range;
  j["nlg_attends_act_states"] = nlg_attends_act_states;
  j["dropout_inputs"] = dropout_inputs;
  return j.dump(2);
}

FrameworkConfig FrameworkConfig::from_json(const std::string& text) {
  FrameworkConfig c;
  try {
    auto j = nlohmann::json::parse(text);
    c.has_nlu = j.value("has_nlu", c.has_nlu);
    c.has_dpl = j.value("has_dpl", c.has_dpl);
    c.d_emb = j.value("d_emb", c.d_emb);
    c.d_hid = j.value("d_hid", c.d_hid);
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.kb_dim = j.value("kb_dim", c.kb_dim);
    c.dropout = j.value("dropout", c.dropout);
    if (j.contains("max_len")) {
      const auto& m = j["max_len"];
      c.max_len.m = m.value("m", c.max_len.m);
      c.max_len.s = m.value("s", c.max_len.s);
      c.max_len.a = m.value("a", c.max_len.a);
      c.max_len.r = m.value("r", c.max_len.r);
    }
    c.seed = j.value("seed", c.seed);
    c.embed_init = j.value("embed_init", c.embed_init);
    c.init_range = j.value("init_range", c.init_range);
    c.nlg_attends_act_states = j.value("nlg_attends_act_states", c.nlg_attends_act_states);
    c.dropout_inputs = j.value("dropout_inputs", c.dropout_inputs);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<ModuleWiring> expected_wiring(const FrameworkConfig& cfg) {
  std::vector<ModuleWiring> out;
  std::string upstream = "encoder";
  if (cfg.has_nlu) {
    out.push_back({Module::nlu, {"B~", "R~", "U~"}, upstream, false});
    upstream = "NLU";
  }
  ModuleWiring dst{Module::dst, {"B~", "R~", "U~"}, upstream, false};
  if (cfg.has_nlu) dst.memory.push_back("M~");
  out.push_back(dst);
  upstream = "DST";
  if (cfg.has_dpl) {
    out.push_back({Module::dpl, {"R~", "U~", "S~"}, upstream, true});
    upstream = "DPL";
    out.push_back({Module::nlg, {cfg.nlg_attends_act_states ? "A~" : "A", "R~", "U~"}, upstream, true});
  } else {
    out.push_back({Module::nlg, {"R~", "U~", "S~"}, upstream, true});
  }
  return out;
}

int OovTable::add(const std::string& word) {
  const int id = vocab_->encode(word);
  if (id != tok::unk || word == tok::kUnk) return id;
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] == word) return vocab_->size() + static_cast<int>(i);
  words_.push_back(word);
  return vocab_->size() + static_cast<int>(words_.size()) - 1;
}

int OovTable::lookup(const std::string& word) const {
  const int id = vocab_->encode(word);
  if (id != tok::unk) return id;
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] == word) return vocab_->size() + static_cast<int>(i);
  return tok::unk;
}

const std::string& OovTable::word(int ext_id) const {
  if (ext_id < vocab_->size()) return vocab_->decode(ext_id);
  const auto i = static_cast<std::size_t>(ext_id - vocab_->size());
  if (i >= words_.size()) throw IndexError("extended token id " + std::to_string(ext_id) + " out of range");
  return words_[i];
}

template <typename T>
std::vector<T> DecodeResult<T>::distribution(std::size_t step, int ext_size, int vocab_size) const {
  auto lg = gen_logits.at(step).value();
  auto cs = copy_scores.at(step).value();
  T m = *std::max_element(lg.begin(), lg.end());
  for (T c : cs) m = std::max(m, c);
  T z = 0;
  for (T x : lg) z += std::exp(x - m);
  for (T c : cs) z += std::exp(c - m);
  std::vector<T> p(static_cast<std::size_t>(ext_size), T(0));
  for (int i = 0; i < vocab_size; ++i) p[static_cast<std::size_t>(i)] = std::exp(lg[static_cast<std::size_t>(i)] - m) / z;
  for (std::size_t i = 0; i < cs.size(); ++i) p[static_cast<std::size_t>(copy_source[i])] += std::exp(cs[i] - m) / z;
  return p;
}

template <typename T>
T DecodeResult<T>::generation_probability(std::size_t step, int vocab_id) const {
  auto lg = gen_logits.at(step).value();
  auto cs = copy_scores.at(step).value();
  T m = *std::max_element(lg.begin(), lg.end());
  for (T c : cs) m = std::max(m, c);
  T z = 0;
  for (T x : lg) z += std::exp(x - m);
  for (T c : cs) z += std::exp(c - m);
  return std::exp(lg[static_cast<std::size_t>(vocab_id)] - m) / z;
}

template <typename T>
T DecodeResult<T>::copy_probability(std::size_t step, int ext_id) const {
  auto lg = gen_logits.at(step).value();
  auto cs = copy_scores.at(step).value();
  T m = *std::max_element(lg.begin(), lg.end());
  for (T c : cs) m = std::max(m, c);
  T z = 0;
  for (T x : lg) z += std::exp(x - m);
  for (T c : cs) z += std::exp(c - m);
  T p = 0;
  for (std::size_t i = 0; i < cs.size(); ++i)
    if (copy_source[i] == ext_id) p += std::exp(cs[i] - m) / z;
  return p;
}

template <typename T>
PredictedTurn TurnOutput<T>::prediction() const {
  PredictedTurn p;
  if (auto* s = get(Module::dst)) p.s = s->words;
  if (auto* a = get(Module::dpl)) p.a = a->words;
  if (auto* r = get(Module::nlg)) p.r = r->words;
  return p;
}

namespace {

std::string prefix(Module m) { return std::string(module_key(m)); }

bool kb_conditioned(Module m) { return m == Module::dpl || m == Module::nlg; }

}  // namespace

template <typename T>
ParameterStore<T> MossNet<T>::make_parameters(const FrameworkConfig& cfg) {
  cfg.validate();
  ParameterStore<T> store(cfg.seed);
  const double r = cfg.init_range;
  store.add("encoder.embedding", {cfg.vocab_size, cfg.d_emb}, Init::uniform, cfg.embed_init);
  register_gru(store, "encoder.gru_fwd", cfg.d_emb, cfg.d_hid, r);
  register_gru(store, "encoder.gru_bwd", cfg.d_emb, cfg.d_hid, r);
  for (Module m : cfg.modules()) {
    const std::string p = prefix(m);
    const int d_in = cfg.d_emb + (kb_conditioned(m) ? cfg.kb_dim : 0);
    register_attention(store, p + ".attn", cfg.d_hid, cfg.d_hid, r);
    register_gru(store, p + ".gru", d_in + cfg.d_hid, cfg.d_hid, r);
    store.add(p + ".out.W", {cfg.vocab_size, 2 * cfg.d_hid}, Init::uniform, r);
    store.add(p + ".out.b", {cfg.vocab_size}, Init::zeros);
    store.add(p + ".copy.W", {cfg.d_hid, cfg.d_hid}, Init::uniform, r);
  }
  if (cfg.has_dpl && !cfg.nlg_attends_act_states) {
    store.add("nlg.act.W", {cfg.d_hid, cfg.d_emb + cfg.kb_dim}, Init::uniform, r);
    store.add("nlg.act.b", {cfg.d_hid}, Init::zeros);
  }
  return store;
}

template <typename T>
MossNet<T>::MossNet(FrameworkConfig cfg, Vocab vocab, KnowledgeBase kb)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)), kb_(std::move(kb)), params_(make_parameters(cfg_)) {
  params_.initialize();
  check_parameters();
}

template <typename T>
MossNet<T>::MossNet(FrameworkConfig cfg, Vocab vocab, KnowledgeBase kb, ParameterStore<T> params)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)), kb_(std::move(kb)), params_(std::move(params)) {
  check_parameters();
}

template <typename T>
void MossNet<T>::check_parameters() const {
  cfg_.validate();
  if (vocab_.size() > cfg_.vocab_size) {
    throw ContractError("vocabulary of " + std::to_string(vocab_.size()) + " tokens exceeds vocab_size " +
                        std::to_string(cfg_.vocab_size));
  }
  const auto expected = make_parameters(cfg_);
  if (expected.size() != params_.size()) {
    throw ContractError("parameter store has " + std::to_string(params_.size()) + " entries, instance " +
                        cfg_.instance_name() + " expects " + std::to_string(expected.size()));
  }
  for (const auto& [name, p] : expected) {
    if (!params_.contains(name)) throw ContractError("missing parameter " + name);
    if (params_.get(name).value.shape != p.value.shape) {
      throw ContractError("parameter " + name + " has shape " + shape_to_string(params_.get(name).value.shape) +
                          ", expected " + shape_to_string(p.value.shape));
    }
  }
}

template <typename T>
EncoderStates<T> MossNet<T>::encode(Tape<T>& tape, const std::vector<int>& b, const std::vector<int>& r,
                                    const std::vector<int>& u) const {
  if (b.empty() || r.empty() || u.empty()) throw ContractError("encode: input sequences must be non-empty");
  std::vector<int> ids;
  ids.reserve(b.size() + r.size() + u.size());
  for (const auto* seq : {&b, &r, &u}) {
    for (int id : *seq) {
      if (id < 0 || id >= cfg_.vocab_size) {
        throw ContractError("encode: token id " + std::to_string(id) + " outside vocabulary of " + std::to_string(cfg_.vocab_size));
      }
      ids.push_back(id);
    }
  }
  Var<T> emb = tape.param(params_.get("encoder.embedding"));
  const GruCell<T> fwd = bind_gru(tape, params_, "encoder.gru_fwd");
  const GruCell<T> bwd = bind_gru(tape, params_, "encoder.gru_bwd");
  const std::size_t n = ids.size();
  std::vector<Var<T>> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = ops::row(emb, ids[i]);
  Var<T> zero = tape.constant(std::vector<T>(static_cast<std::size_t>(cfg_.d_hid), T(0)), cfg_.d_hid);
  std::vector<Var<T>> f(n), bk(n);
  Var<T> h = zero;
  for (std::size_t i = 0; i < n; ++i) f[i] = h = gru_cell(fwd, x[i], h);
  h = zero;
  for (std::size_t i = n; i-- > 0;) bk[i] = h = gru_cell(bwd, x[i], h);
  EncoderStates<T> out;
  for (std::size_t i = 0; i < n; ++i) {
    Var<T> s = ops::add(f[i], bk[i]);
    if (i < b.size()) {
      out.b.push_back(s);
    } else if (i < b.size() + r.size()) {
      out.r.push_back(s);
    } else {
      out.u.push_back(s);
    }
  }
  out.h_E = out.u.back();
  return out;
}

template <typename T>
DecodeResult<T> MossNet<T>::decode_module(Tape<T>& tape, Module module, const Memory& memory, Var<T> h0,
                                          const std::vector<int>* teacher, const MatchDegree* kb, const OovTable& oov,
                                          RunContext& ctx) const {
  if (memory.rows.empty()) throw ContractError("decode " + std::string(module_name(module)) + ": empty memory");
  if (memory.rows.size() != memory.copy_source.size()) {
    throw ContractError("decode: memory rows and copy sources differ in length");
  }
  if ((kb != nullptr) != kb_conditioned(module)) {
    throw ContractError("decode " + std::string(module_name(module)) + ": k_t is required exactly for DPL and NLG");
  }
  if (teacher && teacher->empty()) throw ContractError("decode: empty teacher sequence");
  const std::string p = prefix(module);
  const Attention<T> attn = bind_attention(tape, params_, p + ".attn");
  const GruCell<T> gru = bind_gru(tape, params_, p + ".gru");
  Var<T> emb = tape.param(params_.get("encoder.embedding"));
  Var<T> out_w = tape.param(params_.get(p + ".out.W"));
  Var<T> out_b = tape.param(params_.get(p + ".out.b"));
  Var<T> copy_w = tape.param(params_.get(p + ".copy.W"));

  Var<T> mem = ops::stack_rows<T>(memory.rows);
  Var<T> keys = ops::matmul_nt(mem, attn.W_m);
  Var<T> copy_keys = ops::tanh(ops::matmul_nt(mem, copy_w));
  Var<T> kvec;
  if (kb) {
    auto hot = kb->one_hot();
    kvec = tape.constant(std::vector<T>(hot.begin(), hot.end()), kb->dim);
  }

  const int vsize = vocab_.size();
  const int eos = eos_id(module);
  const std::size_t steps = teacher ? teacher->size() : static_cast<std::size_t>(cfg_.max_len.of(module));
  DecodeResult<T> res;
  res.copy_source = memory.copy_source;
  Var<T> h = h0;
  int prev = tok::go;
  std::vector<int> copy_pos;
  for (std::size_t step = 0; step < steps; ++step) {
    Var<T> x = ops::row(emb, oov.input_id(prev));
    if (cfg_.dropout_inputs) x = ops::dropout(x, ctx.dropout, ctx.training, ctx.rng);
    if (kb) x = ops::concat<T>({x, kvec});
    AttentionResult<T> att = additive_attention(attn, h, mem, keys);
    h = gru_cell(gru, ops::concat<T>({x, att.context}), h);
    // Output features are always dropped; masking the fed-back token embedding
    // as well slows copy learning, so that is opt-in.
    Var<T> o = ops::dropout(ops::concat<T>({h, att.context}), ctx.dropout, ctx.training, ctx.rng);
    Var<T> logits = ops::linear(out_w, o, out_b);
    Var<T> copy = ops::matvec(copy_keys, h);
    res.hidden.push_back(h);
    res.gen_logits.push_back(logits);
    res.copy_scores.push_back(copy);
    res.attention.push_back(att.weights);

    int next;
    if (teacher) {
      next = (*teacher)[step];
      copy_pos.clear();
      for (std::size_t i = 0; i < memory.copy_source.size(); ++i)
        if (memory.copy_source[i] == next) copy_pos.push_back(static_cast<int>(i));
      int gen_target = next < vsize ? next : -1;
      if (gen_target < 0 && copy_pos.empty()) gen_target = tok::unk;
      res.step_nll.push_back(ops::mixture_nll(logits, copy, gen_target, copy_pos));
    } else {
      const auto dist = res.distribution(step, oov.size(), vsize);
      next = static_cast<int>(std::max_element(dist.begin(), dist.end()) - dist.begin());
    }
    res.tokens.push_back(next);
    prev = next;
    if (!teacher && next == eos) break;
  }
  res.truncated = res.tokens.empty() || res.tokens.back() != eos;
  return res;
}

template <typename T>
TurnOutput<T> MossNet<T>::forward_turn(Tape<T>& tape, const TurnInput& input, const TurnTeacher* teacher,
                                       RunContext& ctx) const {
  if (teacher) {
    for (Module m : kAllModules) {
      if ((*teacher)[m] && !cfg_.has(m)) {
        throw ContractError("teacher given for module " + std::string(module_name(m)) + " absent from instance " +
                            cfg_.instance_name());
      }
    }
  }
  TurnOutput<T> out(vocab_);
  OovTable& oov = out.oov;
  auto ext = [&](const Tokens& ts) {
    std::vector<int> ids;
    ids.reserve(ts.size());
    for (const auto& t : ts) ids.push_back(oov.add(t));
    return ids;
  };
  const std::vector<int> b_ext = ext(input.b_prev);
  const std::vector<int> r_ext = ext(input.r_prev);
  const std::vector<int> u_ext = ext(input.u);
  auto in_vocab = [&](const std::vector<int>& ids) {
    std::vector<int> v(ids.size());
    std::transform(ids.begin(), ids.end(), v.begin(), [&](int id) { return oov.input_id(id); });
    return v;
  };
  out.encoder = encode(tape, in_vocab(b_ext), in_vocab(r_ext), in_vocab(u_ext));
  const EncoderStates<T>& enc = out.encoder;

  auto append = [](Memory& mem, const std::vector<Var<T>>& rows, const std::vector<int>& ids) {
    mem.rows.insert(mem.rows.end(), rows.begin(), rows.end());
    mem.copy_source.insert(mem.copy_source.end(), ids.begin(), ids.end());
  };
  auto run = [&](Module m, const Memory& mem, Var<T> h0, std::string h0_from, std::vector<std::string> sources,
                 const MatchDegree* kb) -> ModuleOutput<T>& {
    const Tokens* gold = teacher ? (*teacher)[m] : nullptr;
    std::vector<int> target;
    if (gold) {
      target.reserve(gold->size() + 1);
      for (const auto& t : *gold) target.push_back(oov.lookup(t));
      target.push_back(eos_id(m));
    }
    ModuleOutput<T> mo;
    mo.decode = decode_module(tape, m, mem, h0, gold ? &target : nullptr, kb, oov, ctx);
    mo.teacher_forced = gold != nullptr;
    if (gold) {
      mo.words = *gold;
      mo.loss = ops::scale(ops::add_scalars<T>(mo.decode.step_nll), T(1) / static_cast<T>(mo.decode.step_nll.size()));
    } else {
      for (int id : mo.decode.tokens)
        if (id != eos_id(m)) mo.words.push_back(oov.word(id));
    }
    out.h0[static_cast<std::size_t>(module_index(m))] = h0;
    out.wiring.push_back({m, std::move(sources), std::move(h0_from), kb != nullptr});
    auto& slot = out.modules[static_cast<std::size_t>(module_index(m))];
    slot = std::move(mo);
    return *slot;
  };

  Var<T> upstream = enc.h_E;
  std::string upstream_name = "encoder";

  const ModuleOutput<T>* nlu = nullptr;
  if (cfg_.has_nlu) {
    Memory mem;
    append(mem, enc.b, b_ext);
    append(mem, enc.r, r_ext);
    append(mem, enc.u, u_ext);
    nlu = &run(Module::nlu, mem, upstream, upstream_name, {"B~", "R~", "U~"}, nullptr);
    upstream = nlu->decode.last_hidden();
    upstream_name = "NLU";
  }

  Memory dst_mem;
  append(dst_mem, enc.b, b_ext);
  append(dst_mem, enc.r, r_ext);
  append(dst_mem, enc.u, u_ext);
  std::vector<std::string> dst_sources{"B~", "R~", "U~"};
  if (nlu) {
    append(dst_mem, nlu->decode.hidden, nlu->decode.tokens);
    dst_sources.push_back("M~");
  }
  const ModuleOutput<T>& dst = run(Module::dst, dst_mem, upstream, upstream_name, dst_sources, nullptr);
  upstream = dst.decode.last_hidden();
  upstream_name = "DST";

  out.k = query(kb_, state_to_query(dst.words, kb_), cfg_.kb_dim).degree;

  Memory nlg_mem;
  std::vector<std::string> nlg_sources;
  if (cfg_.has_dpl) {
    Memory mem;
    append(mem, enc.r, r_ext);
    append(mem, enc.u, u_ext);
    append(mem, dst.decode.hidden, dst.decode.tokens);
    const ModuleOutput<T>& dpl = run(Module::dpl, mem, upstream, upstream_name, {"R~", "U~", "S~"}, &out.k);
    upstream = dpl.decode.last_hidden();
    upstream_name = "DPL";
    if (cfg_.nlg_attends_act_states) {
      append(nlg_mem, dpl.decode.hidden, dpl.decode.tokens);
      nlg_sources.push_back("A~");
    } else {
      Var<T> emb = tape.param(params_.get("encoder.embedding"));
      Var<T> act_w = tape.param(params_.get("nlg.act.W"));
      Var<T> act_b = tape.param(params_.get("nlg.act.b"));
      auto hot = out.k.one_hot();
      Var<T> kvec = tape.constant(std::vector<T>(hot.begin(), hot.end()), out.k.dim);
      for (int id : dpl.decode.tokens) {
        Var<T> e = ops::concat<T>({ops::row(emb, oov.input_id(id)), kvec});
        nlg_mem.rows.push_back(ops::tanh(ops::linear(act_w, e, act_b)));
        nlg_mem.copy_source.push_back(id);
      }
      nlg_sources.push_back("A");
    }
    append(nlg_mem, enc.r, r_ext);
    append(nlg_mem, enc.u, u_ext);
    nlg_sources.insert(nlg_sources.end(), {"R~", "U~"});
  } else {
    append(nlg_mem, enc.r, r_ext);
    append(nlg_mem, enc.u, u_ext);
    append(nlg_mem, dst.decode.hidden, dst.decode.tokens);
    nlg_sources = {"R~", "U~", "S~"};
  }
  run(Module::nlg, nlg_mem, upstream, upstream_name, nlg_sources, &out.k);
  return out;
}

template <typename T>
std::vector<TurnOutput<T>> MossNet<T>::run_dialog(Tape<T>& tape, const Dialog& dialog, Source source, RunContext& ctx,
                                                  bool teacher_forcing) const {
  if (dialog.turns.empty()) throw ContractError("run_dialog: dialog " + dialog.dialog_id + " has no turns");
  std::vector<TurnOutput<T>> outs;
  outs.reserve(dialog.turns.size());
  for (std::size_t t = 0; t < dialog.turns.size(); ++t) {
    PredictedTurn prev;
    if (t > 0) prev = outs.back().prediction();
    const TurnInput input =
        make_turn_input(dialog, static_cast<int>(t + 1), source, t > 0 ? &prev : nullptr, cfg_.has_dpl);
    TurnTeacher teacher;
    if (teacher_forcing) {
      for (Module m : cfg_.modules()) teacher[m] = dialog.turns[t].gold(m);
    }
    outs.push_back(forward_turn(tape, input, teacher_forcing ? &teacher : nullptr, ctx));
  }
  return outs;
}

template struct DecodeResult<float>;
template struct DecodeResult<double>;
template struct TurnOutput<float>;
template struct TurnOutput<double>;
template class MossNet<float>;
template class MossNet<double>;

}  // namespace moss
