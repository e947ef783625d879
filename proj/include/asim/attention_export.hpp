#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "asim/dataset.hpp"
#include "asim/model.hpp"

namespace asim {

/// Row-softmaxed attention weights e_X of one pair with the token labels.
struct AttentionExport {
  std::vector<std::string> x_tokens;
  std::vector<std::string> y_tokens;
  std::vector<double> matrix;  // x_tokens.size() × y_tokens.size(), row-major

  std::size_t rows() const { return x_tokens.size(); }
  std::size_t cols() const { return y_tokens.size(); }
  double at(std::size_t r, std::size_t c) const { return matrix[r * cols() + c]; }
};

/// Eval-mode forward of the pair. Throws ConfigError when the model was
/// built without the attention layer.
AttentionExport export_attention(const AsimModel& model, const KnowledgeUnit& x, const KnowledgeUnit& y);

/// Header row holds the y tokens, the first column the x tokens. An optional
/// `# provenance` comment precedes the header.
void write_attention_csv(const std::filesystem::path& path, const AttentionExport& att,
                         std::string_view provenance = {});
AttentionExport read_attention_csv(const std::filesystem::path& path);

/// Grid heatmap; each cell's fill opacity equals its weight.
std::string attention_svg(const AttentionExport& att, std::string_view provenance = {});
void write_attention_svg(const std::filesystem::path& path, const AttentionExport& att,
                         std::string_view provenance = {});

}  // namespace asim
