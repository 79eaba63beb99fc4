#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace bodycorr {

// Writes via a temp file in the same directory, then renames into place.
void atomic_write_text(const std::string& path, const std::string& content);
void atomic_write_bytes(const std::string& path, const std::vector<char>& bytes);

// Flat binary array: 16-byte header (4-byte magic "ARR" + dtype code, then
// uint32 width, height, channels), followed by the little-endian payload in
// (y, x, channel) order. dtype codes: 'i' int32, 'f' float32, 'd' float64.
struct ArrayFile {
    char dtype = 'd';
    std::uint32_t width = 0, height = 0, channels = 0;
    std::vector<std::int32_t> ints;
    std::vector<float> floats;
    std::vector<double> doubles;

    std::size_t element_count() const {
        return static_cast<std::size_t>(width) * height * channels;
    }
};

void write_array(const std::string& path, const ArrayFile& array);
ArrayFile read_array(const std::string& path);

// Convenience wrappers for the common cases.
void write_int_array(const std::string& path, const std::vector<std::int32_t>& values,
                     std::uint32_t width, std::uint32_t height, std::uint32_t channels);
void write_double_array(const std::string& path, const std::vector<double>& values,
                        std::uint32_t width, std::uint32_t height, std::uint32_t channels);

// Grayscale portable float map ("Pf", little-endian, rows bottom-to-top).
void write_pfm(const std::string& path, const Eigen::MatrixXf& image);
Eigen::MatrixXf read_pfm(const std::string& path);

// FNV-1a over the bytes of a string; used for config hashes.
std::uint64_t fnv1a_hash(const std::string& text);

// Key = value text files, '#' comments, insertion order preserved on write.
std::vector<std::pair<std::string, std::string>> read_key_values(const std::string& path);
void write_key_values(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace bodycorr
