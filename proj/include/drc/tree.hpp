// tree.hpp
// Bracketed constituency tree parsing, shared by corpus validation and the
// production-rule feature extractor.

#ifndef DRC_TREE_HPP
#define DRC_TREE_HPP

#include <string>
#include <string_view>
#include <vector>

namespace drc {

struct TreeNode {
  std::string label;
  std::vector<TreeNode> children;

  bool is_leaf() const { return children.empty(); }
};

/// Parses a bracketed tree such as "(S (NP (NNP Mr.) (NNP Brady)) (VP ...))".
/// Leaves are bare tokens. Throws FormatError on unbalanced or empty input;
/// `context` is prepended to the message (typically the instance id).
TreeNode parse_bracketed_tree(std::string_view text, std::string_view context);

int leaf_count(const TreeNode& node);

/// Collects the surface strings of the leaves in left-to-right order.
void collect_leaves(const TreeNode& node, std::vector<std::string>& out);

}  // namespace drc

#endif  // DRC_TREE_HPP
