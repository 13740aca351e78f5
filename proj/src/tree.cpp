#include "drc/tree.hpp"

#include <cctype>

#include "drc/error.hpp"

namespace drc {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

struct TreeParser {
  std::string_view text;
  std::size_t pos = 0;
  std::string_view context;

  [[noreturn]] void fail(const std::string& what) {
    throw FormatError(std::string(context) + ": malformed parse tree: " + what);
  }

  void skip_space() {
    while (pos < text.size() && is_space(text[pos])) ++pos;
  }

  std::string read_atom() {
    std::size_t start = pos;
    while (pos < text.size() && !is_space(text[pos]) && text[pos] != '(' && text[pos] != ')') {
      ++pos;
    }
    if (pos == start) fail("expected a label or token at offset " + std::to_string(pos));
    return std::string(text.substr(start, pos - start));
  }

  TreeNode parse_node() {
    skip_space();
    if (pos >= text.size() || text[pos] != '(') fail("expected '('");
    ++pos;
    skip_space();
    TreeNode node;
    node.label = read_atom();
    skip_space();
    while (pos < text.size() && text[pos] != ')') {
      if (text[pos] == '(') {
        node.children.push_back(parse_node());
      } else {
        TreeNode leaf;
        leaf.label = read_atom();
        node.children.push_back(std::move(leaf));
      }
      skip_space();
    }
    if (pos >= text.size()) fail("unbalanced brackets");
    ++pos;  // consume ')'
    if (node.children.empty()) fail("node '" + node.label + "' has no children");
    return node;
  }
};

}  // namespace

TreeNode parse_bracketed_tree(std::string_view text, std::string_view context) {
  TreeParser parser{text, 0, context};
  parser.skip_space();
  if (parser.pos >= text.size()) parser.fail("empty tree");
  TreeNode root = parser.parse_node();
  parser.skip_space();
  if (parser.pos != text.size()) parser.fail("trailing content after root node");
  return root;
}

int leaf_count(const TreeNode& node) {
  if (node.is_leaf()) return 1;
  int n = 0;
  for (const TreeNode& child : node.children) n += leaf_count(child);
  return n;
}

void collect_leaves(const TreeNode& node, std::vector<std::string>& out) {
  if (node.is_leaf()) {
    out.push_back(node.label);
    return;
  }
  for (const TreeNode& child : node.children) collect_leaves(child, out);
}

}  // namespace drc
