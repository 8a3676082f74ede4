#include "output.hpp"

#include <algorithm>
#include <charconv>
#include <system_error>

#include <json.hpp>

#include "tdlab/cli/experiment_config.hpp"

namespace tdlab::cli {

void append_number(std::string& out, double value) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, ec == std::errc() ? end : buf);
}

std::string format_number(double value) {
  std::string s;
  append_number(s, value);
  return s;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.emplace_back(text.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec || !std::filesystem::is_directory(root_)) {
    throw IoError("cannot create output directory '" + root_.string() + "'");
  }
}

std::ofstream OutputDir::open(const std::string& relative) {
  const auto path = root_ / relative;
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  if (std::find(artifacts_.begin(), artifacts_.end(), relative) == artifacts_.end()) {
    artifacts_.push_back(relative);
  }
  return out;
}

void OutputDir::close(std::ofstream& stream, const std::string& relative) {
  stream.close();
  if (!stream) throw IoError("error writing '" + (root_ / relative).string() + "'");
}

void OutputDir::write_text(const std::string& relative, std::string_view text) {
  auto out = open(relative);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  close(out, relative);
}

void OutputDir::write_manifest(std::string_view command, std::string_view config_hash) {
  auto sorted = artifacts_;
  std::sort(sorted.begin(), sorted.end());
  nlohmann::ordered_json doc;
  doc["version"] = kConfigVersion;
  doc["command"] = command;
  doc["config_hash"] = config_hash;
  doc["artifacts"] = sorted;
  write_text("manifest.json", doc.dump(2) + "\n");
}

}  // namespace tdlab::cli
