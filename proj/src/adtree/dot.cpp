// Copyright 2026 The adforge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "adforge/adtree/dot.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "adforge/errors.hpp"

namespace adforge::adtree {

namespace {

enum class Tok {
  kId,        // identifier, numeral or quoted string
  kLBrace,
  kRBrace,
  kLBracket,
  kRBracket,
  kSemi,
  kComma,
  kEquals,
  kArrow,     // ->
  kUndirected,
  kColon,
  kEnd,
};

struct Token {
  Tok type;
  std::string text;
  bool quoted = false;
  int line = 1;
  int column = 1;
};

bool IsIdStart(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool IsIdChar(unsigned char c) { return IsIdStart(c) || std::isdigit(c); }

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool IsKeyword(std::string_view s) {
  const std::string l = Lower(s);
  return l == "digraph" || l == "graph" || l == "node" || l == "edge" ||
         l == "subgraph" || l == "strict";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token Next() {
    SkipTrivia();
    Token t;
    t.line = line_;
    t.column = col_;
    if (pos_ >= src_.size()) {
      t.type = Tok::kEnd;
      return t;
    }
    const char c = src_[pos_];
    switch (c) {
      case '{': Advance(); t.type = Tok::kLBrace; return t;
      case '}': Advance(); t.type = Tok::kRBrace; return t;
      case '[': Advance(); t.type = Tok::kLBracket; return t;
      case ']': Advance(); t.type = Tok::kRBracket; return t;
      case ';': Advance(); t.type = Tok::kSemi; return t;
      case ',': Advance(); t.type = Tok::kComma; return t;
      case '=': Advance(); t.type = Tok::kEquals; return t;
      case ':': Advance(); t.type = Tok::kColon; return t;
      case '<':
        throw ParseError(t.line, t.column, "HTML strings are not supported");
      case '"':
        t.type = Tok::kId;
        t.quoted = true;
        t.text = QuotedString();
        return t;
      default:
        break;
    }
    if (c == '-' && pos_ + 1 < src_.size()) {
      if (src_[pos_ + 1] == '>') {
        Advance();
        Advance();
        t.type = Tok::kArrow;
        return t;
      }
      if (src_[pos_ + 1] == '-') {
        Advance();
        Advance();
        t.type = Tok::kUndirected;
        return t;
      }
    }
    if (c == '-' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) {
      t.type = Tok::kId;
      t.text = Numeral();
      return t;
    }
    if (IsIdStart(static_cast<unsigned char>(c))) {
      t.type = Tok::kId;
      while (pos_ < src_.size() && IsIdChar(static_cast<unsigned char>(src_[pos_]))) {
        t.text.push_back(src_[pos_]);
        Advance();
      }
      return t;
    }
    throw ParseError(t.line, t.column, std::string("unexpected character '") + c + "'");
  }

 private:
  void Advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void SkipTrivia() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        Advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') Advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
        const int line = line_, col = col_;
        Advance();
        Advance();
        while (true) {
          if (pos_ + 1 >= src_.size()) {
            throw ParseError(line, col, "unterminated block comment");
          }
          if (src_[pos_] == '*' && src_[pos_ + 1] == '/') {
            Advance();
            Advance();
            break;
          }
          Advance();
        }
      } else if (c == '#' && col_ == 1) {
        // C preprocessor output lines are ignored, as Graphviz does.
        while (pos_ < src_.size() && src_[pos_] != '\n') Advance();
      } else {
        break;
      }
    }
  }

  std::string QuotedString() {
    const int line = line_, col = col_;
    Advance();  // opening quote
    std::string out;
    while (true) {
      if (pos_ >= src_.size()) throw ParseError(line, col, "unterminated string");
      const char c = src_[pos_];
      if (c == '"') {
        Advance();
        break;
      }
      if (c == '\\' && pos_ + 1 < src_.size()) {
        const char n = src_[pos_ + 1];
        if (n == '"' || n == '\\') {
          out.push_back(n);
          Advance();
          Advance();
          continue;
        }
        if (n == '\n') {
          Advance();
          Advance();
          continue;
        }
      }
      out.push_back(c);
      Advance();
    }
    // "a" + "b" concatenation.
    const std::size_t save_pos = pos_;
    const int save_line = line_, save_col = col_;
    SkipTrivia();
    if (pos_ < src_.size() && src_[pos_] == '+') {
      Advance();
      SkipTrivia();
      if (pos_ < src_.size() && src_[pos_] == '"') return out + QuotedString();
      throw ParseError(line_, col_, "expected quoted string after '+'");
    }
    pos_ = save_pos;
    line_ = save_line;
    col_ = save_col;
    return out;
  }

  std::string Numeral() {
    const int line = line_, col = col_;
    std::string out;
    if (src_[pos_] == '-') {
      out.push_back('-');
      Advance();
    }
    bool digits = false, dot = false;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        digits = true;
      } else if (c == '.' && !dot) {
        dot = true;
      } else {
        break;
      }
      out.push_back(c);
      Advance();
    }
    if (!digits) throw ParseError(line, col, "malformed numeral");
    if (pos_ < src_.size() && IsIdStart(static_cast<unsigned char>(src_[pos_]))) {
      throw ParseError(line_, col_, "identifier may not start with a digit");
    }
    return out;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct RawNode {
  AttrMap attrs;
  std::optional<std::string> default_fill;
  int line = 0;
  int column = 0;
};

struct RawEdge {
  std::string parent;
  std::string child;
  AttrMap attrs;
};

struct RawGraph {
  std::string name;
  AttrMap graph_attrs;
  AttrMap node_defaults;
  AttrMap edge_defaults;
  std::vector<std::string> order;  // node ids by first appearance
  std::map<std::string, RawNode> nodes;
  std::vector<RawEdge> edges;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) { tok_ = lex_.Next(); }

  RawGraph Parse() {
    if (IsWord("strict")) Bump();
    if (IsWord("graph")) Fail("undirected graphs are not supported; use digraph");
    if (!IsWord("digraph")) Fail("expected 'digraph'");
    Bump();
    if (tok_.type == Tok::kId && !(IsKeyword(tok_.text) && !tok_.quoted)) {
      g_.name = tok_.text;
      Bump();
    }
    Expect(Tok::kLBrace, "'{'");
    StatementList();
    Expect(Tok::kRBrace, "'}'");
    if (tok_.type != Tok::kEnd) Fail("unexpected content after graph");
    return std::move(g_);
  }

 private:
  [[noreturn]] void Fail(const std::string& msg) const {
    throw ParseError(tok_.line, tok_.column, msg);
  }

  bool IsWord(std::string_view w) const {
    return tok_.type == Tok::kId && !tok_.quoted && Lower(tok_.text) == w;
  }

  void Bump() { tok_ = lex_.Next(); }

  Token Expect(Tok type, const char* what) {
    if (tok_.type != type) Fail(std::string("expected ") + what);
    Token t = tok_;
    Bump();
    return t;
  }

  std::string ExpectId(const char* what) {
    if (tok_.type != Tok::kId) Fail(std::string("expected ") + what);
    if (!tok_.quoted && IsKeyword(tok_.text)) {
      Fail("keyword '" + tok_.text + "' cannot be used as " + what);
    }
    std::string s = tok_.text;
    Bump();
    return s;
  }

  void StatementList() {
    while (tok_.type != Tok::kRBrace && tok_.type != Tok::kEnd) {
      if (tok_.type == Tok::kSemi) {
        Bump();
        continue;
      }
      Statement();
    }
  }

  void Statement() {
    if (tok_.type == Tok::kLBrace || IsWord("subgraph")) {
      Fail("subgraphs and clusters are not supported");
    }
    if (IsWord("graph")) {
      Bump();
      AttrList(g_.graph_attrs, /*required=*/true);
      return;
    }
    if (IsWord("node")) {
      Bump();
      AttrList(g_.node_defaults, true);
      return;
    }
    if (IsWord("edge")) {
      Bump();
      AttrList(g_.edge_defaults, true);
      return;
    }
    const Token head = tok_;
    std::string id = ExpectId("node id");
    if (tok_.type == Tok::kColon) Fail("node ports are not supported");
    if (tok_.type == Tok::kEquals) {
      Bump();
      g_.graph_attrs[id] = ExpectId("attribute value");
      return;
    }
    if (tok_.type == Tok::kUndirected) Fail("undirected edge '--' in a digraph");
    if (tok_.type == Tok::kArrow) {
      std::vector<std::pair<std::string, Token>> chain{{id, head}};
      while (tok_.type == Tok::kArrow) {
        Bump();
        if (tok_.type == Tok::kLBrace || IsWord("subgraph")) {
          Fail("subgraphs and clusters are not supported");
        }
        const Token t = tok_;
        chain.emplace_back(ExpectId("node id"), t);
        if (tok_.type == Tok::kColon) Fail("node ports are not supported");
        if (tok_.type == Tok::kUndirected) Fail("undirected edge '--' in a digraph");
      }
      AttrMap attrs;
      if (tok_.type == Tok::kLBracket) AttrList(attrs, false);
      for (const auto& [nid, t] : chain) Touch(nid, t);
      for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        g_.edges.push_back({chain[i].first, chain[i + 1].first, attrs});
      }
      return;
    }
    RawNode& node = Touch(id, head);
    if (tok_.type == Tok::kLBracket) AttrList(node.attrs, false);
  }

  RawNode& Touch(const std::string& id, const Token& at) {
    auto [it, inserted] = g_.nodes.try_emplace(id);
    if (inserted) {
      g_.order.push_back(id);
      it->second.line = at.line;
      it->second.column = at.column;
      auto fill = g_.node_defaults.find(std::string(kAttrFill));
      if (fill != g_.node_defaults.end()) it->second.default_fill = fill->second;
    }
    return it->second;
  }

  void AttrList(AttrMap& into, bool required) {
    if (tok_.type != Tok::kLBracket) {
      if (required) Fail("expected '['");
      return;
    }
    while (tok_.type == Tok::kLBracket) {
      Bump();
      while (tok_.type != Tok::kRBracket) {
        std::string key = ExpectId("attribute name");
        Expect(Tok::kEquals, "'=' after attribute name");
        if (tok_.type != Tok::kId) Fail("expected attribute value");
        into[key] = tok_.text;
        Bump();
        if (tok_.type == Tok::kComma || tok_.type == Tok::kSemi) Bump();
      }
      Bump();
    }
  }

  Lexer lex_;
  Token tok_;
  RawGraph g_;
};

std::vector<std::string> SplitList(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t end = value.find(kListSeparator, start);
    if (end == std::string::npos) end = value.size();
    std::string item = value.substr(start, end - start);
    const auto first = item.find_first_not_of(" \t\r\n");
    if (first != std::string::npos) {
      const auto last = item.find_last_not_of(" \t\r\n");
      out.push_back(item.substr(first, last - first + 1));
    }
    start = end + kListSeparator.size();
  }
  return out;
}

std::string JoinList(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += kListSeparator;
    out += items[i];
  }
  return out;
}

[[noreturn]] void BadAttr(const std::string& id, const std::string& msg) {
  throw StructureError(StructureFault::kInvalidAnnotation, id,
                       "node '" + id + "': " + msg);
}

std::optional<int> ParseInt(const std::string& s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::int64_t> ParseInt64(const std::string& s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

ADNode ToNode(const std::string& id, const RawNode& raw,
              const std::map<std::string, int>& in_deg,
              const std::map<std::string, int>& out_deg) {
  ADNode node;
  node.id = id;
  std::optional<NodeKind> kind;
  for (const auto& [key, value] : raw.attrs) {
    if (key == kAttrKind) {
      kind = KindFromName(value);
      if (!kind) BadAttr(id, "unknown adtkind '" + value + "'");
    } else if (key == kAttrLabel) {
      node.label = value;
    } else if (key == kAttrMitre) {
      node.mitre_id = value;
    } else if (key == kAttrMitreOk) {
      const std::string l = Lower(value);
      if (l == "true") {
        node.mitre_appropriate = true;
      } else if (l == "false") {
        node.mitre_appropriate = false;
      } else {
        BadAttr(id, "mitre_ok must be true or false");
      }
    } else if (key == kAttrCommands) {
      node.commands = SplitList(value);
    } else if (key == kAttrInputs) {
      node.inputs = SplitList(value);
    } else if (key == kAttrExpect) {
      node.expected_results = value;
    } else if (key == kAttrStep) {
      node.step_index = ParseInt64(value);
      if (!node.step_index || *node.step_index < 0) {
        BadAttr(id, "step must be a non-negative integer");
      }
    } else if (key == kAttrFill) {
      node.fillcolor = value;
    } else if (key == kAttrFontName) {
      node.fontname = value;
    } else if (key == kAttrFontSize) {
      node.fontsize = ParseInt(value);
      if (!node.fontsize) BadAttr(id, "fontsize must be an integer");
    } else {
      node.extra[key] = value;
    }
  }
  if (!kind) {
    const auto& fill = node.fillcolor ? node.fillcolor : raw.default_fill;
    if (fill) kind = KindFromFill(*fill);
  }
  if (!kind) {
    const int in = in_deg.count(id) ? in_deg.at(id) : 0;
    const int out = out_deg.count(id) ? out_deg.at(id) : 0;
    kind = in == 0 ? NodeKind::kRoot : out == 0 ? NodeKind::kGoal : NodeKind::kAttack;
  }
  node.kind = *kind;
  return node;
}

bool IsBareId(std::string_view s) {
  if (s.empty() || !IsIdStart(static_cast<unsigned char>(s[0]))) return false;
  if (!std::all_of(s.begin(), s.end(),
                   [](unsigned char c) { return IsIdChar(c); })) {
    return false;
  }
  return !IsKeyword(s);
}

std::string Quote(std::string_view s) {
  std::string out = "\"";
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '"') {
      out += "\\\"";
    } else if (c == '\\') {
      const char n = i + 1 < s.size() ? s[i + 1] : '\0';
      // Escape only where a bare backslash would change meaning, so common
      // Graphviz escapes such as \n and \l survive unchanged.
      if (n == '"' || n == '\\' || n == '\n' || n == '\0') {
        out += "\\\\";
      } else {
        out += '\\';
      }
    } else {
      out += c;
    }
  }
  out += '"';
  return out;
}

std::string Id(std::string_view s) { return IsBareId(s) ? std::string(s) : Quote(s); }

void EmitAttrs(std::ostringstream& os,
               const std::vector<std::pair<std::string, std::string>>& attrs) {
  os << " [";
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (i) os << ", ";
    os << Id(attrs[i].first) << '=' << attrs[i].second;
  }
  os << ']';
}

std::vector<std::pair<std::string, std::string>> Quoted(const AttrMap& m) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, v] : m) out.emplace_back(k, Quote(v));
  return out;
}

}  // namespace

std::optional<NodeKind> KindFromFill(std::string_view color) {
  const std::string c = Lower(color);
  static const char* const kDark[] = {"darkblue", "navy", "navyblue", "midnightblue",
                                      "mediumblue", "blue", "blue4", "darkslateblue"};
  static const char* const kLight[] = {"lightblue", "lightskyblue", "skyblue",
                                       "powderblue", "lightsteelblue", "lightcyan",
                                       "aliceblue", "lightblue1", "lightblue2"};
  for (const char* n : kDark) {
    if (c == n) return NodeKind::kService;
  }
  for (const char* n : kLight) {
    if (c == n) return NodeKind::kAttack;
  }
  if (c.size() == 7 && c[0] == '#' && IsColor(c)) {
    const long rgb = std::strtol(c.c_str() + 1, nullptr, 16);
    const int r = static_cast<int>((rgb >> 16) & 0xff);
    const int g = static_cast<int>((rgb >> 8) & 0xff);
    const int b = static_cast<int>(rgb & 0xff);
    if (b <= r || b < g) return std::nullopt;
    const double luma = 0.2126 * r + 0.7152 * g + 0.0722 * b;
    if (luma < 80.0) return NodeKind::kService;
    if (luma > 150.0) return NodeKind::kAttack;
  }
  return std::nullopt;
}

std::string EncodeStyleSheet(const StyleSheet& sheet) {
  std::vector<std::string> parts;
  for (const auto& [kind, color] : sheet.fill) {
    parts.push_back("fill." + std::string(KindName(kind)) + "=" + color);
  }
  if (sheet.fontname) parts.push_back("fontname=" + *sheet.fontname);
  if (sheet.fontsize) parts.push_back("fontsize=" + std::to_string(*sheet.fontsize));
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ';';
    out += parts[i];
  }
  return out;
}

StyleSheet DecodeStyleSheet(std::string_view text) {
  StyleSheet sheet;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find(';', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view part = text.substr(start, end - start);
    start = end + 1;
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) {
      throw StructureError(StructureFault::kInvalidAnnotation, "",
                           "malformed adtstyle entry '" + std::string(part) + "'");
    }
    const std::string key(part.substr(0, eq));
    const std::string value(part.substr(eq + 1));
    if (key.rfind("fill.", 0) == 0) {
      auto kind = KindFromName(key.substr(5));
      if (!kind) {
        throw StructureError(StructureFault::kInvalidAnnotation, "",
                             "adtstyle names unknown kind '" + key.substr(5) + "'");
      }
      sheet.fill[*kind] = value;
    } else if (key == "fontname") {
      sheet.fontname = value;
    } else if (key == "fontsize") {
      sheet.fontsize = ParseInt(value);
      if (!sheet.fontsize) {
        throw StructureError(StructureFault::kInvalidAnnotation, "",
                             "adtstyle fontsize must be an integer");
      }
    } else {
      throw StructureError(StructureFault::kInvalidAnnotation, "",
                           "unknown adtstyle key '" + key + "'");
    }
  }
  return sheet;
}

ADTree ParseDot(std::string_view text) {
  RawGraph g = Parser(text).Parse();

  std::optional<StyleSheet> style;
  if (auto it = g.graph_attrs.find(std::string(kAttrStyleSheet));
      it != g.graph_attrs.end()) {
    style = DecodeStyleSheet(it->second);
    g.graph_attrs.erase(it);
  }

  std::map<std::string, int> in_deg, out_deg;
  for (const auto& e : g.edges) {
    ++out_deg[e.parent];
    ++in_deg[e.child];
  }

  std::map<std::string, ADNode> nodes;
  for (const auto& id : g.order) {
    ADNode node = ToNode(id, g.nodes.at(id), in_deg, out_deg);
    if (style) {
      // Values equal to the sheet are the sheet's rendering, not overrides.
      auto fill = style->fill.find(node.kind);
      if (fill != style->fill.end() && node.fillcolor == fill->second) {
        node.fillcolor.reset();
      }
      if (style->fontname && node.fontname == style->fontname) node.fontname.reset();
      if (style->fontsize && node.fontsize == style->fontsize) node.fontsize.reset();
    }
    nodes.emplace(id, std::move(node));
  }

  std::vector<Edge> edges;
  edges.reserve(g.edges.size());
  for (auto& e : g.edges) {
    edges.push_back({std::move(e.parent), std::move(e.child), std::move(e.attrs)});
  }

  ADTree tree = ADTree::Build(std::move(nodes), std::move(edges), style);
  tree.name = std::move(g.name);
  tree.graph_attrs = std::move(g.graph_attrs);
  tree.node_defaults = std::move(g.node_defaults);
  tree.edge_defaults = std::move(g.edge_defaults);
  return tree;
}

std::string EmitDot(const ADTree& tree) {
  std::ostringstream os;
  os << "digraph ";
  if (!tree.name.empty()) os << Id(tree.name) << ' ';
  os << "{\n";

  auto graph_attrs = Quoted(tree.graph_attrs);
  if (tree.style()) {
    graph_attrs.emplace_back(std::string(kAttrStyleSheet),
                             Quote(EncodeStyleSheet(*tree.style())));
    std::sort(graph_attrs.begin(), graph_attrs.end());
  }
  if (!graph_attrs.empty()) {
    os << "  graph";
    EmitAttrs(os, graph_attrs);
    os << ";\n";
  }
  if (!tree.node_defaults.empty()) {
    os << "  node";
    EmitAttrs(os, Quoted(tree.node_defaults));
    os << ";\n";
  }
  if (!tree.edge_defaults.empty()) {
    os << "  edge";
    EmitAttrs(os, Quoted(tree.edge_defaults));
    os << ";\n";
  }

  const StyleSheet sheet = tree.style().value_or(StyleSheet{});
  for (const auto& [id, n] : tree.nodes()) {
    std::vector<std::pair<std::string, std::string>> attrs;
    attrs.emplace_back(std::string(kAttrKind), std::string(KindName(n.kind)));
    if (!n.label.empty()) attrs.emplace_back(std::string(kAttrLabel), Quote(n.label));
    if (n.mitre_id) attrs.emplace_back(std::string(kAttrMitre), Quote(*n.mitre_id));
    if (n.mitre_appropriate) {
      attrs.emplace_back(std::string(kAttrMitreOk), *n.mitre_appropriate ? "true" : "false");
    }
    if (!n.commands.empty()) {
      attrs.emplace_back(std::string(kAttrCommands), Quote(JoinList(n.commands)));
    }
    if (!n.inputs.empty()) {
      attrs.emplace_back(std::string(kAttrInputs), Quote(JoinList(n.inputs)));
    }
    if (n.expected_results) {
      attrs.emplace_back(std::string(kAttrExpect), Quote(*n.expected_results));
    }
    if (n.step_index) attrs.emplace_back(std::string(kAttrStep), std::to_string(*n.step_index));

    std::optional<std::string> fill = n.fillcolor;
    if (!fill) {
      if (auto it = sheet.fill.find(n.kind); it != sheet.fill.end()) fill = it->second;
    }
    if (fill) attrs.emplace_back(std::string(kAttrFill), Quote(*fill));
    if (auto font = n.fontname ? n.fontname : sheet.fontname) {
      attrs.emplace_back(std::string(kAttrFontName), Quote(*font));
    }
    if (auto size = n.fontsize ? n.fontsize : sheet.fontsize) {
      attrs.emplace_back(std::string(kAttrFontSize), std::to_string(*size));
    }
    for (const auto& [k, v] : n.extra) attrs.emplace_back(k, Quote(v));

    os << "  " << Id(id);
    EmitAttrs(os, attrs);
    os << ";\n";
  }
  for (const auto& e : tree.edges()) {
    os << "  " << Id(e.parent) << " -> " << Id(e.child);
    if (!e.attrs.empty()) EmitAttrs(os, Quoted(e.attrs));
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace adforge::adtree
