#include "asim/model.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "asim/errors.hpp"
#include "asim/ops.hpp"

namespace asim {
namespace {

constexpr std::string_view kMagic = "ASIMCKPT";
constexpr std::uint32_t kFormatVersion = 1;

std::string join_dims(std::span<const std::size_t> dims) {
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) out += (i ? "," : "") + std::to_string(dims[i]);
  return out;
}

std::vector<std::size_t> parse_dims(std::string_view s) {
  std::vector<std::size_t> dims;
  std::size_t start = 0;
  while (start < s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    std::size_t v = 0;
    auto piece = s.substr(start, comma - start);
    auto [p, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), v);
    if (ec != std::errc() || p != piece.data() + piece.size()) {
      throw ConfigError("bad dimension list '" + std::string(s) + "'");
    }
    dims.push_back(v);
    start = comma + 1;
  }
  return dims;
}

bool parse_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true/false, got '" + std::string(v) + "'");
}

std::size_t parse_size(const std::string& key, std::string_view v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected an integer");
  return out;
}

void add_lstm(std::vector<NamedTensor>& out, const std::string& prefix, const LstmParams& p) {
  out.push_back({prefix + ".input_weights", p.input_weights});
  out.push_back({prefix + ".recurrent_weights", p.recurrent_weights});
  out.push_back({prefix + ".bias", p.bias});
}

void add_affine(std::vector<NamedTensor>& out, const std::string& prefix, const Affine& a) {
  if (!a.weight.defined()) return;
  out.push_back({prefix + ".weight", a.weight});
  out.push_back({prefix + ".bias", a.bias});
}

// Little-endian host layout; checkpoints are not meant to cross endianness.
class Writer {
 public:
  template <typename T>
  void pod(T v) {
    buf_.append(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void str(std::string_view s) {
    pod<std::uint64_t>(s.size());
    buf_.append(s);
  }
  void doubles(std::span<const double> v) { buf_.append(reinterpret_cast<const char*>(v.data()), v.size_bytes()); }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(std::string_view bytes, std::string source) : bytes_(bytes), source_(std::move(source)) {}
  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof v);
    pos_ += sizeof v;
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::vector<double> doubles(std::size_t n) {
    need(n * sizeof(double));
    std::vector<double> v(n);
    std::memcpy(v.data(), bytes_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw ParseError(source_, 0, "truncated checkpoint");
  }
  std::string_view bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

void AsimConfig::validate() const {
  if (num_classes != 2 && num_classes != 4) {
    throw ConfigError("num_classes must be 2 or 4, got " + std::to_string(num_classes));
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (hidden == 0) throw ConfigError("hidden must be positive");
  if (embed_dim == 0) throw ConfigError("embed_dim must be positive");
  if (max_len == 0) throw ConfigError("max_len must be positive");
  for (auto d : prediction_hidden_dims)
    if (d == 0) throw ConfigError("prediction hidden widths must be positive");
}

std::string AsimConfig::to_text() const {
  std::ostringstream os;
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, dropout);
  os << "dropout=" << std::string_view(buf, res.ptr - buf) << '\n'
     << "embed_dim=" << embed_dim << '\n'
     << "hidden=" << hidden << '\n'
     << "max_len=" << max_len << '\n'
     << "num_classes=" << num_classes << '\n'
     << "prediction_hidden_dims=" << join_dims(prediction_hidden_dims) << '\n'
     << "train_embeddings=" << (train_embeddings ? "true" : "false") << '\n'
     << "use_attention=" << (use_attention ? "true" : "false") << '\n'
     << "use_fusion=" << (use_fusion ? "true" : "false") << '\n'
     << "use_shortcuts=" << (use_shortcuts ? "true" : "false") << '\n';
  return os.str();
}

AsimConfig AsimConfig::from_text(std::string_view text) {
  AsimConfig cfg;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line without '=': " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "dropout") cfg.dropout = std::stod(value);
    else if (key == "embed_dim") cfg.embed_dim = parse_size(key, value);
    else if (key == "hidden") cfg.hidden = parse_size(key, value);
    else if (key == "max_len") cfg.max_len = parse_size(key, value);
    else if (key == "num_classes") cfg.num_classes = parse_size(key, value);
    else if (key == "prediction_hidden_dims") cfg.prediction_hidden_dims = parse_dims(value);
    else if (key == "train_embeddings") cfg.train_embeddings = parse_bool(key, value);
    else if (key == "use_attention") cfg.use_attention = parse_bool(key, value);
    else if (key == "use_fusion") cfg.use_fusion = parse_bool(key, value);
    else if (key == "use_shortcuts") cfg.use_shortcuts = parse_bool(key, value);
    else throw ConfigError("unknown model config key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kFull: return "ASIM";
    case Variant::kNoFusion: return "ASIM (-FL)";
    case Variant::kNoShortcuts: return "ASIM (-SC)";
    case Variant::kNoFusionNoShortcuts: return "ASIM (-FL-SC)";
    case Variant::kNoAttention: return "ASIM (-Attn-FL-SC)";
  }
  return "?";
}

std::string_view variant_key(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kNoFusion: return "fl";
    case Variant::kNoShortcuts: return "sc";
    case Variant::kNoFusionNoShortcuts: return "fl,sc";
    case Variant::kNoAttention: return "attn,fl,sc";
  }
  return "?";
}

Variant parse_variant(std::string_view key) {
  for (Variant v : all_variants())
    if (variant_key(v) == key) return v;
  throw ConfigError("unknown ablation variant '" + std::string(key) + "'");
}

AsimConfig apply_variant(AsimConfig cfg, Variant v) {
  cfg.use_attention = v != Variant::kNoAttention;
  cfg.use_fusion = v == Variant::kFull || v == Variant::kNoShortcuts;
  cfg.use_shortcuts = v == Variant::kFull || v == Variant::kNoFusion;
  return cfg;
}

std::span<const Variant> all_variants() {
  static constexpr Variant kAll[] = {Variant::kFull, Variant::kNoFusion, Variant::kNoShortcuts,
                                     Variant::kNoFusionNoShortcuts, Variant::kNoAttention};
  return kAll;
}

Affine Affine::init(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> w(in * out);
  for (auto& v : w) v = dist(rng);
  return {Tensor::from({in, out}, std::move(w), true), Tensor::zeros({out}, true)};
}

Tensor Affine::operator()(const Tensor& x) const { return add_row(matmul(x, weight), bias); }

Tensor DropoutContext::operator()(const Tensor& v) {
  if (!training_ || rate_ == 0.0) return v;
  return dropout_apply(v, rate_, true, rng_());
}

Tensor embed_sequence(std::span<const int> ids, const Tensor& table) { return gather_rows(table, ids, kPadId); }

Tensor input_encode(const Tensor& x_emb, const Mask& mask, const BiLstmParams& encoder, DropoutContext& dropout) {
  if (x_emb.rows() == 0) throw DimensionError("input_encode: empty sequence");
  return dropout(run_bilstm(x_emb, mask, encoder));
}

AttentionResult inter_attention(const Tensor& x, const Tensor& y, const Mask& mask_x, const Mask& mask_y) {
  if (x.cols() != y.cols()) {
    throw DimensionError("inter_attention: widths differ " + shape_str(x.shape()) + " vs " + shape_str(y.shape()));
  }
  const std::size_t k = x.cols();
  AttentionResult r;
  r.scores = matmul(x, transpose(y));
  r.weights_x = scaled_softmax_rows(r.scores, k, mask_y);
  r.weights_y = scaled_softmax_rows(transpose(r.scores), k, mask_x);
  r.x_hat = matmul(r.weights_x, y);
  r.y_hat = matmul(r.weights_y, x);
  return r;
}

Tensor fuse(const Tensor& x, const Tensor& x_hat, const AsimParams& params, const AsimConfig& cfg,
            DropoutContext& dropout) {
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) {
    throw DimensionError("fuse: " + shape_str(x.shape()) + " vs " + shape_str(x_hat.shape()));
  }
  if (!cfg.use_fusion) {
    const Tensor both[] = {x, x_hat};
    return params.concat_projection(concat_cols(both));
  }
  auto ff = [&](const Affine& layer, const Tensor& other) {
    const Tensor in[] = {x, other};
    return dropout(relu(layer(concat_cols(in))));
  };
  const Tensor parts[] = {ff(params.fuse_concat, x_hat), ff(params.fuse_difference, sub(x, x_hat)),
                          ff(params.fuse_product, mul(x, x_hat))};
  return dropout(relu(params.fuse_merge(concat_cols(parts))));
}

Tensor compose(const Tensor& x_tilde, const Tensor& x_emb, const Mask& mask, const AsimParams& params,
               const AsimConfig& cfg, DropoutContext& dropout) {
  if (x_tilde.rows() != x_emb.rows()) {
    throw DimensionError("compose: " + shape_str(x_tilde.shape()) + " vs " + shape_str(x_emb.shape()));
  }
  Tensor input = x_tilde;
  if (cfg.use_shortcuts) {
    const Tensor parts[] = {x_tilde, x_emb};
    input = concat_cols(parts);
  }
  return dropout(run_bilstm(input, mask, params.composer));
}

ForwardTrace predict(const Tensor& vx, const Tensor& vy, const Mask& mask_x, const Mask& mask_y,
                     const AsimParams& params, DropoutContext& dropout) {
  ForwardTrace t;
  t.pooled_x = max_over_time(vx, mask_x);
  t.pooled_y = max_over_time(vy, mask_y);
  const Tensor features[] = {t.pooled_x, t.pooled_y, sub(t.pooled_x, t.pooled_y), mul(t.pooled_x, t.pooled_y)};
  t.prediction_input = concat_cols(features);
  Tensor h = t.prediction_input;
  for (const auto& layer : params.prediction_hidden) h = dropout(relu(layer(h)));
  t.logits = params.prediction_output(h);
  t.probs = softmax(t.logits.data());
  return t;
}

AsimModel::AsimModel(AsimConfig cfg, Vocabulary vocab, EmbeddingTable table, std::uint64_t init_seed)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)) {
  cfg_.validate();
  if (table.dim != cfg_.embed_dim) {
    throw ConfigError("embedding dimension " + std::to_string(table.dim) + " differs from embed_dim " +
                      std::to_string(cfg_.embed_dim));
  }
  if (table.rows() != vocab_.size()) throw ConfigError("embedding rows do not match the vocabulary");
  const Shape table_shape{table.rows(), table.dim};
  embedding_ = Tensor::from(table_shape, std::move(table.vectors), cfg_.train_embeddings);

  std::mt19937_64 rng(init_seed);
  const std::size_t e = cfg_.embed_dim, h = cfg_.hidden, k = cfg_.k();
  params_.encoder = {LstmParams::init(e, h, rng), LstmParams::init(e, h, rng)};
  if (cfg_.use_attention) {
    if (cfg_.use_shortcuts) params_.attention_input = Affine::init(e + k, k, rng);
    if (cfg_.use_fusion) {
      params_.fuse_concat = Affine::init(2 * k, k, rng);
      params_.fuse_difference = Affine::init(2 * k, k, rng);
      params_.fuse_product = Affine::init(2 * k, k, rng);
      params_.fuse_merge = Affine::init(3 * k, k, rng);
    } else {
      params_.concat_projection = Affine::init(2 * k, k, rng);
    }
  }
  const std::size_t composer_in = k + (cfg_.use_shortcuts ? e : 0);
  params_.composer = {LstmParams::init(composer_in, h, rng), LstmParams::init(composer_in, h, rng)};
  std::size_t width = 4 * k;
  for (auto d : cfg_.prediction_hidden_dims) {
    params_.prediction_hidden.push_back(Affine::init(width, d, rng));
    width = d;
  }
  params_.prediction_output = Affine::init(width, cfg_.num_classes, rng);
}

std::vector<NamedTensor> AsimModel::state() const {
  std::vector<NamedTensor> out;
  out.push_back({"embedding.table", embedding_});
  add_lstm(out, "encoder.fwd", params_.encoder.forward);
  add_lstm(out, "encoder.bwd", params_.encoder.backward);
  add_affine(out, "attention.input", params_.attention_input);
  add_affine(out, "fusion.f1", params_.fuse_concat);
  add_affine(out, "fusion.f2", params_.fuse_difference);
  add_affine(out, "fusion.f3", params_.fuse_product);
  add_affine(out, "fusion.merge", params_.fuse_merge);
  add_affine(out, "fusion.concat", params_.concat_projection);
  add_lstm(out, "composer.fwd", params_.composer.forward);
  add_lstm(out, "composer.bwd", params_.composer.backward);
  for (std::size_t i = 0; i < params_.prediction_hidden.size(); ++i)
    add_affine(out, "prediction.hidden" + std::to_string(i), params_.prediction_hidden[i]);
  add_affine(out, "prediction.output", params_.prediction_output);
  return out;
}

std::vector<NamedTensor> AsimModel::parameters() const {
  auto all = state();
  if (!cfg_.train_embeddings) all.erase(all.begin());
  return all;
}

void AsimModel::zero_grad() {
  for (auto& p : state()) p.tensor.zero_grad();
}

ForwardTrace AsimModel::forward(SequenceRef x, SequenceRef y, Mode mode, std::uint64_t seed) const {
  if (x.ids.size() != x.mask.size() || y.ids.size() != y.mask.size()) {
    throw DimensionError("forward: ids and mask lengths differ");
  }
  DropoutContext dropout(cfg_.dropout, mode == Mode::kTrain, seed);
  const Tensor ex = embed_sequence(x.ids, embedding_);
  const Tensor ey = embed_sequence(y.ids, embedding_);
  const Tensor enc_x = input_encode(ex, x.mask, params_.encoder, dropout);
  const Tensor enc_y = input_encode(ey, y.mask, params_.encoder, dropout);

  Tensor fused_x = enc_x, fused_y = enc_y;
  AttentionResult att;
  if (cfg_.use_attention) {
    Tensor ax = enc_x, ay = enc_y;
    if (cfg_.use_shortcuts) {
      const Tensor px[] = {ex, enc_x};
      const Tensor py[] = {ey, enc_y};
      ax = params_.attention_input(concat_cols(px));
      ay = params_.attention_input(concat_cols(py));
    }
    att = inter_attention(ax, ay, x.mask, y.mask);
    fused_x = fuse(ax, att.x_hat, params_, cfg_, dropout);
    fused_y = fuse(ay, att.y_hat, params_, cfg_, dropout);
  }
  const Tensor vx = compose(fused_x, ex, x.mask, params_, cfg_, dropout);
  const Tensor vy = compose(fused_y, ey, y.mask, params_, cfg_, dropout);
  ForwardTrace trace = predict(vx, vy, x.mask, y.mask, params_, dropout);
  trace.scores = att.scores;
  trace.weights_x = att.weights_x;
  trace.weights_y = att.weights_y;
  return trace;
}

ForwardTrace AsimModel::forward(std::span<const int> x, std::span<const int> y, Mode mode, std::uint64_t seed) const {
  const Mask mx(x.size(), true), my(y.size(), true);
  return forward(SequenceRef{x, mx}, SequenceRef{y, my}, mode, seed);
}

std::string AsimModel::serialize() const {
  Writer w;
  w.str(kMagic);
  w.pod<std::uint32_t>(kFormatVersion);
  w.str(std::string("# ") + std::string(kToolVersion) + "\n" + cfg_.to_text());
  std::string vocab_text;
  for (const auto& t : vocab_.tokens()) vocab_text += t + '\n';
  w.str(vocab_text);
  w.pod<std::uint64_t>(vocab_.hash());
  const auto tensors = state();
  w.pod<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& nt : tensors) {
    w.str(nt.name);
    const auto& shape = nt.tensor.shape();
    w.pod<std::uint32_t>(static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) w.pod<std::uint64_t>(d);
    w.doubles(nt.tensor.data());
  }
  return w.take();
}

AsimModel AsimModel::deserialize(std::string_view bytes, const std::string& source) {
  Reader r(bytes, source);
  if (r.str() != kMagic) throw ParseError(source, 0, "not an ASIM checkpoint");
  const auto version = r.pod<std::uint32_t>();
  if (version != kFormatVersion) {
    throw ParseError(source, 0, "unsupported checkpoint version " + std::to_string(version));
  }
  const AsimConfig cfg = AsimConfig::from_text(r.str());
  const std::string vocab_text = r.str();
  std::vector<std::string> tokens;
  std::istringstream vs(vocab_text);
  for (std::string line; std::getline(vs, line);) tokens.push_back(line);
  if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kOovToken) {
    throw ParseError(source, 0, "checkpoint vocabulary lacks reserved entries");
  }
  Vocabulary vocab = Vocabulary::from_tokens(std::span(tokens).subspan(2));
  if (vocab.hash() != r.pod<std::uint64_t>()) throw ParseError(source, 0, "vocabulary hash mismatch");

  AsimModel model(cfg, vocab, oov_table(vocab, cfg.embed_dim), 0);
  auto slots = model.state();
  const auto count = r.pod<std::uint32_t>();
  if (count != slots.size()) {
    throw ParseError(source, 0, "checkpoint holds " + std::to_string(count) + " tensors, model expects " +
                                    std::to_string(slots.size()));
  }
  for (auto& slot : slots) {
    const std::string name = r.str();
    if (name != slot.name) throw ParseError(source, 0, "expected tensor '" + slot.name + "', found '" + name + "'");
    Shape shape(r.pod<std::uint32_t>());
    for (auto& d : shape) d = r.pod<std::uint64_t>();
    if (shape != slot.tensor.shape()) {
      throw ParseError(source, 0, "tensor '" + name + "' has shape " + shape_str(shape) + ", expected " +
                                      shape_str(slot.tensor.shape()));
    }
    auto values = r.doubles(shape_numel(shape));
    std::copy(values.begin(), values.end(), slot.tensor.mutable_data().begin());
  }
  if (!r.done()) throw ParseError(source, 0, "trailing bytes after checkpoint");
  return model;
}

void AsimModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  const std::string bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

AsimModel AsimModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str(), path.string());
}

AsimModel AsimModel::clone() const { return deserialize(serialize()); }

}  // namespace asim
