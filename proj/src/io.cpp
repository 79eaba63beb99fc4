#include "bodycorr/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bodycorr {

namespace {

// All file formats are little-endian; raw memcpy is only valid on LE hosts.
static_assert(std::endian::native == std::endian::little);

template <typename T>
void put(std::vector<char>& out, T value) {
    const size_t at = out.size();
    out.resize(at + sizeof(T));
    std::memcpy(out.data() + at, &value, sizeof(T));
}

template <typename T>
T take(const std::vector<char>& in, size_t& at) {
    if (at + sizeof(T) > in.size()) throw std::runtime_error("array: truncated file");
    T value;
    std::memcpy(&value, in.data() + at, sizeof(T));
    at += sizeof(T);
    return value;
}

std::vector<char> read_all_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("io: cannot open " + path);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    return bytes;
}

void rename_into_place(const std::string& tmp, const std::string& path) {
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error("io: rename failed for " + path);
    }
}

}  // namespace

void atomic_write_bytes(const std::string& path, const std::vector<char>& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("io: cannot write " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("io: write failed for " + tmp);
    }
    rename_into_place(tmp, path);
}

void atomic_write_text(const std::string& path, const std::string& content) {
    atomic_write_bytes(path, std::vector<char>(content.begin(), content.end()));
}

void write_array(const std::string& path, const ArrayFile& array) {
    std::vector<char> out;
    out.reserve(16 + array.element_count() * 8);
    out.push_back('A');
    out.push_back('R');
    out.push_back('R');
    out.push_back(array.dtype);
    put<std::uint32_t>(out, array.width);
    put<std::uint32_t>(out, array.height);
    put<std::uint32_t>(out, array.channels);
    const size_t n = array.element_count();
    switch (array.dtype) {
        case 'i':
            if (array.ints.size() != n) throw std::invalid_argument("array: size mismatch");
            for (auto v : array.ints) put(out, v);
            break;
        case 'f':
            if (array.floats.size() != n) throw std::invalid_argument("array: size mismatch");
            for (auto v : array.floats) put(out, v);
            break;
        case 'd':
            if (array.doubles.size() != n) throw std::invalid_argument("array: size mismatch");
            for (auto v : array.doubles) put(out, v);
            break;
        default:
            throw std::invalid_argument("array: unknown dtype code");
    }
    atomic_write_bytes(path, out);
}

ArrayFile read_array(const std::string& path) {
    const std::vector<char> bytes = read_all_bytes(path);
    if (bytes.size() < 16 || bytes[0] != 'A' || bytes[1] != 'R' || bytes[2] != 'R') {
        throw std::runtime_error("array: bad magic in " + path);
    }
    ArrayFile array;
    array.dtype = bytes[3];
    size_t at = 4;
    array.width = take<std::uint32_t>(bytes, at);
    array.height = take<std::uint32_t>(bytes, at);
    array.channels = take<std::uint32_t>(bytes, at);
    const size_t n = array.element_count();
    switch (array.dtype) {
        case 'i':
            array.ints.resize(n);
            for (auto& v : array.ints) v = take<std::int32_t>(bytes, at);
            break;
        case 'f':
            array.floats.resize(n);
            for (auto& v : array.floats) v = take<float>(bytes, at);
            break;
        case 'd':
            array.doubles.resize(n);
            for (auto& v : array.doubles) v = take<double>(bytes, at);
            break;
        default:
            throw std::runtime_error("array: unknown dtype code in " + path);
    }
    return array;
}

void write_int_array(const std::string& path, const std::vector<std::int32_t>& values,
                     std::uint32_t width, std::uint32_t height, std::uint32_t channels) {
    ArrayFile array;
    array.dtype = 'i';
    array.width = width;
    array.height = height;
    array.channels = channels;
    array.ints = values;
    write_array(path, array);
}

void write_double_array(const std::string& path, const std::vector<double>& values,
                        std::uint32_t width, std::uint32_t height, std::uint32_t channels) {
    ArrayFile array;
    array.dtype = 'd';
    array.width = width;
    array.height = height;
    array.channels = channels;
    array.doubles = values;
    write_array(path, array);
}

void write_pfm(const std::string& path, const Eigen::MatrixXf& image) {
    // rows(): height, cols(): width; PFM stores rows bottom-to-top and a
    // negative scale marks little-endian payload.
    std::ostringstream header;
    header << "Pf\n" << image.cols() << ' ' << image.rows() << "\n-1.0\n";
    const std::string header_text = header.str();
    std::vector<char> out(header_text.begin(), header_text.end());
    for (Eigen::Index y = image.rows() - 1; y >= 0; --y) {
        for (Eigen::Index x = 0; x < image.cols(); ++x) {
            put<float>(out, image(y, x));
        }
    }
    atomic_write_bytes(path, out);
}

Eigen::MatrixXf read_pfm(const std::string& path) {
    const std::vector<char> bytes = read_all_bytes(path);
    std::istringstream header(std::string(bytes.begin(), bytes.end()));
    std::string magic;
    long width, height;
    double scale;
    if (!(header >> magic >> width >> height >> scale) || magic != "Pf") {
        throw std::runtime_error("pfm: bad header in " + path);
    }
    if (scale >= 0) throw std::runtime_error("pfm: big-endian files unsupported: " + path);
    size_t at = static_cast<size_t>(header.tellg()) + 1;  // single whitespace after scale
    Eigen::MatrixXf image(height, width);
    for (long y = height - 1; y >= 0; --y) {
        for (long x = 0; x < width; ++x) {
            image(y, x) = take<float>(bytes, at);
        }
    }
    return image;
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::vector<std::pair<std::string, std::string>> read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("io: cannot open " + path);
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int line_no = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 'key = value'");
        }
        entries.emplace_back(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
    return entries;
}

void write_key_values(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ostringstream out;
    for (const auto& [key, value] : entries) out << key << " = " << value << "\n";
    atomic_write_text(path, out.str());
}

}  // namespace bodycorr
