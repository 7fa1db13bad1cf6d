#include "speechalign/tinylm/checkpoint.hpp"

#include "speechalign/common/error.hpp"
#include "speechalign/common/jsonl.hpp"

namespace speechalign::tinylm {

namespace {

constexpr const char* kFormatName = "speechalign-checkpoint";

}  // namespace

nlohmann::json checkpoint_to_json(const ModelParams& params, const Vocab* vocab) {
  const auto& c = params.config();
  nlohmann::json doc;
  doc["format"] = kFormatName;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["config"] = {{"n_layers", c.n_layers}, {"d_model", c.d_model}, {"n_heads", c.n_heads},
                   {"context", c.context},   {"vocab_size", c.vocab_size}, {"d_ff", c.d_ff}};
  if (vocab != nullptr) doc["vocab"] = vocab->tokens();
  auto& tensors = doc["tensors"] = nlohmann::json::array();
  for (const auto& t : params.tensors()) {
    tensors.push_back({{"name", t.name},
                       {"group", std::string(to_string(t.group))},
                       {"layer", t.layer},
                       {"shape", {t.rows, t.cols}},
                       {"data", t.data}});
  }
  return doc;
}

Checkpoint checkpoint_from_json(const nlohmann::json& doc) {
  try {
    if (doc.value("format", "") != kFormatName) throw ValidationError("not a speechalign checkpoint");
    const int version = doc.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw ValidationError("unsupported checkpoint format_version " + std::to_string(version));
    }
    const auto& jc = doc.at("config");
    ModelConfig c;
    c.n_layers = jc.at("n_layers").get<int>();
    c.d_model = jc.at("d_model").get<int>();
    c.n_heads = jc.at("n_heads").get<int>();
    c.context = jc.at("context").get<int>();
    c.vocab_size = jc.at("vocab_size").get<int>();
    c.d_ff = jc.value("d_ff", 0);

    Checkpoint ck{ModelParams::zeros(c), std::nullopt};
    const auto& jt = doc.at("tensors");
    auto& tensors = ck.params.tensors();
    if (jt.size() != tensors.size()) throw ValidationError("checkpoint tensor count mismatch");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      const auto& j = jt[i];
      auto& t = tensors[i];
      if (j.at("name").get<std::string>() != t.name ||
          parse_group(j.at("group").get<std::string>()) != t.group ||
          j.at("layer").get<int>() != t.layer ||
          j.at("shape").get<std::vector<std::size_t>>() != std::vector<std::size_t>{t.rows, t.cols}) {
        throw ValidationError("checkpoint tensor " + std::to_string(i) + " (" +
                              j.value("name", std::string("?")) + ") does not match layout");
      }
      auto data = j.at("data").get<std::vector<double>>();
      if (data.size() != t.data.size()) throw ValidationError("tensor " + t.name + " size mismatch");
      t.data = std::move(data);
    }
    ck.params.validate();
    if (doc.contains("vocab")) {
      ck.vocab.emplace(doc.at("vocab").get<std::vector<std::string>>());
      if (ck.vocab->size() != static_cast<std::size_t>(c.vocab_size)) {
        throw ValidationError("checkpoint vocab size does not match config");
      }
    }
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const Vocab* vocab) {
  write_text_file(path, checkpoint_to_json(params, vocab).dump());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return checkpoint_from_json(doc);
}

}  // namespace speechalign::tinylm
