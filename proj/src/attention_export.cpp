#include "asim/attention_export.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "asim/errors.hpp"

namespace asim {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t comma; (comma = line.find(',', start)) != std::string::npos; start = comma + 1)
    out.push_back(line.substr(start, comma - start));
  out.push_back(line.substr(start));
  return out;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

AttentionExport export_attention(const AsimModel& model, const KnowledgeUnit& x, const KnowledgeUnit& y) {
  if (!model.config().use_attention) throw ConfigError("the model has no attention layer to export");
  if (x.size() == 0 || y.size() == 0) throw EmptyUnitError("attention export needs two non-empty units");
  const auto trace = model.forward(x.token_ids, y.token_ids, Mode::kEval);
  AttentionExport att{x.tokens, y.tokens, {}};
  const auto w = trace.weights_x.data();
  att.matrix.assign(w.begin(), w.end());
  return att;
}

void write_attention_csv(const std::filesystem::path& path, const AttentionExport& att, std::string_view provenance) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  if (!provenance.empty()) out << "# " << provenance << '\n';
  for (const auto& t : att.y_tokens) out << ',' << t;
  out << '\n';
  char buf[40];
  for (std::size_t r = 0; r < att.rows(); ++r) {
    out << att.x_tokens[r];
    for (std::size_t c = 0; c < att.cols(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g", att.at(r, c));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

AttentionExport read_attention_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  AttentionExport att;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv(line);
    if (!header) {
      att.y_tokens.assign(cells.begin() + 1, cells.end());
      header = true;
      continue;
    }
    if (cells.size() != att.y_tokens.size() + 1) throw ParseError(path.string(), line_no, "wrong number of cells");
    att.x_tokens.push_back(cells[0]);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      try {
        att.matrix.push_back(std::stod(cells[c]));
      } catch (const std::logic_error&) {
        throw ParseError(path.string(), line_no, "malformed weight '" + cells[c] + "'");
      }
    }
  }
  if (!header) throw ParseError(path.string(), line_no, "missing header row");
  return att;
}

std::string attention_svg(const AttentionExport& att, std::string_view provenance) {
  constexpr int kCell = 24;
  constexpr int kFont = 11;
  std::size_t longest_x = 1, longest_y = 1;
  for (const auto& t : att.x_tokens) longest_x = std::max(longest_x, t.size());
  for (const auto& t : att.y_tokens) longest_y = std::max(longest_y, t.size());
  const int left = static_cast<int>(longest_x) * 7 + 10;
  const int top = static_cast<int>(longest_y) * 7 + 10;
  const int width = left + static_cast<int>(att.cols()) * kCell + 10;
  const int height = top + static_cast<int>(att.rows()) * kCell + 10;

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!provenance.empty()) os << "<!-- " << xml_escape(provenance) << " -->\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"monospace\" font-size=\"" << kFont << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t c = 0; c < att.cols(); ++c) {
    const int cx = left + static_cast<int>(c) * kCell + kCell / 2;
    os << "<text x=\"" << cx << "\" y=\"" << top - 4 << "\" transform=\"rotate(-90 " << cx << ' ' << top - 4
       << ")\">" << xml_escape(att.y_tokens[c]) << "</text>\n";
  }
  char buf[64];
  for (std::size_t r = 0; r < att.rows(); ++r) {
    const int y = top + static_cast<int>(r) * kCell;
    os << "<text x=\"" << left - 4 << "\" y=\"" << y + kCell / 2 + 4 << "\" text-anchor=\"end\">"
       << xml_escape(att.x_tokens[r]) << "</text>\n";
    for (std::size_t c = 0; c < att.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.6f", att.at(r, c));
      os << "<rect x=\"" << left + static_cast<int>(c) * kCell << "\" y=\"" << y << "\" width=\"" << kCell
         << "\" height=\"" << kCell << "\" fill=\"#08306b\" fill-opacity=\"" << buf
         << "\" stroke=\"#dddddd\"><title>" << xml_escape(att.x_tokens[r]) << " / " << xml_escape(att.y_tokens[c])
         << ": " << buf << "</title></rect>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

void write_attention_svg(const std::filesystem::path& path, const AttentionExport& att, std::string_view provenance) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << attention_svg(att, provenance);
}

}  // namespace asim
