#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

namespace tassel {

/// Line reader over plain or gzip files (chosen by a `.gz` suffix).
class LineReader {
public:
    explicit LineReader(const std::filesystem::path& path);
    ~LineReader();
    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;

    /// Reads the next line without its terminator; false at end of file.
    bool next(std::string& line);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Writes `text` to `path`, gzip-compressing when the name ends in `.gz`.
void write_file(const std::filesystem::path& path, std::string_view text);
std::string read_file(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);
/// Hex FNV-1a digest of a file's bytes, used for run manifests.
std::string file_digest(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

using WarningSink = std::function<void(const std::string&)>;
/// Replaces the warning sink (stderr by default); returns the previous one.
WarningSink set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace tassel
