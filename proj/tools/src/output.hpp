#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace tdlab::cli {

/// Shortest decimal text that parses back to `value`.
void append_number(std::string& out, double value);
std::string format_number(double value);

/// Splits on commas; an empty string gives an empty list.
std::vector<std::string> split_list(std::string_view text);

/**
 * Output directory that remembers every artifact written through it, so the
 * manifest can list them. All failures throw IoError.
 */
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  /// Opens `relative` for writing (parent directories are created).
  std::ofstream open(const std::string& relative);
  void write_text(const std::string& relative, std::string_view text);
  /// Checks the stream after the last write.
  void close(std::ofstream& stream, const std::string& relative);

  /// manifest.json with the command, config hash and sorted artifact paths.
  void write_manifest(std::string_view command, std::string_view config_hash);

 private:
  std::filesystem::path root_;
  std::vector<std::string> artifacts_;
};

}  // namespace tdlab::cli
