#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <set>
#include <string>

namespace tree_compare {

inline std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::set<std::string> files_under(const std::filesystem::path &root) {
  std::set<std::string> out;
  for (const auto &entry : std::filesystem::recursive_directory_iterator(root))
    if (entry.is_regular_file())
      out.insert(std::filesystem::relative(entry.path(), root).generic_string());
  return out;
}

/// Same relative file names with byte-identical contents.
inline bool identical(const std::filesystem::path &a,
                      const std::filesystem::path &b) {
  const auto fa = files_under(a);
  const auto fb = files_under(b);
  if (fa != fb) {
    std::cerr << "file sets differ under " << a << " and " << b << '\n';
    return false;
  }
  for (const auto &f : fa)
    if (slurp(a / f) != slurp(b / f)) {
      std::cerr << "contents differ: " << f << '\n';
      return false;
    }
  return !fa.empty();
}

} // namespace tree_compare
