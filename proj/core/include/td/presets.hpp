#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "td/types.hpp"

namespace td {

/// A finitely generated matrix group with everything the drivers need to
/// run on it. Inverses of the generators are adjoined by the enumerator.
struct GroupPreset {
  std::string name;
  std::string description;
  std::vector<GroupElement> generators;
  RootSubset theta;
  /// "klein-disk" when the group acts on the disk through SL(2,R) -> SO(2,1).
  std::string domain;
  /// Named subgroups, each a list of words in the generators.
  std::map<std::string, std::vector<Word>> subgroups;
  /// Known to be free on the generators: any matrix collision is an error.
  bool free = false;
  /// Integer matrices with integer inverses: exact deduplication applies.
  bool integer = false;
};

/// Names accepted by make_preset, in a fixed order.
std::vector<std::string> preset_names();

/// Throws ConfigError for unknown names.
GroupPreset make_preset(std::string_view name);

/// <a, b> with a = diag(lambda, 1/lambda) and b = r a r^T, r the rotation by
/// `angle`. Free and discrete once lambda is large enough for ping-pong.
GroupPreset schottky_preset(double lambda, double angle = 0.7853981633974483);

/// Symmetric square SL(2,R) -> SL(3,R).
Matrix sym2(const Matrix& a);
/// Applies sym2 to every generator; theta becomes {1,2}.
GroupPreset sym2_preset(const GroupPreset& sl2);

/// The subgroup generated by the given words, as a preset of its own.
GroupPreset subgroup_preset(const GroupPreset& parent, const std::vector<Word>& words, std::string name,
                            bool free);

/// Preset with generators conjugated by c (same abstract group and alphabet).
GroupPreset conjugate_preset(const GroupPreset& p, const Matrix& c);

}  // namespace td
