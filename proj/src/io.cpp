#include "wheelplan/io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wheelplan/errors.hpp"

namespace wheelplan::io {

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

    void skip_space_and_comments(std::vector<std::string>& comments) {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                const std::size_t end = bytes_.find('\n', pos_);
                std::string_view text = bytes_.substr(pos_ + 1, (end == std::string_view::npos ? bytes_.size() : end) - pos_ - 1);
                while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
                while (!text.empty() && (text.back() == '\r' || text.back() == ' ')) text.remove_suffix(1);
                comments.emplace_back(text);
                pos_ = end == std::string_view::npos ? bytes_.size() : end + 1;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                return;
            }
        }
    }

    int read_int(std::vector<std::string>& comments, const char* what) {
        skip_space_and_comments(comments);
        const std::size_t start = pos_;
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000) throw ParseError(std::string("netpbm: ") + what + " out of range", start);
            ++pos_;
        }
        if (pos_ == start) throw ParseError(std::string("netpbm: expected ") + what, start);
        return static_cast<int>(value);
    }

    std::size_t pos() const { return pos_; }
    void advance(std::size_t n) { pos_ += n; }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

Netpbm parse_netpbm(std::string_view bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw ParseError("netpbm: expected P5 or P6 magic", 0);
    }
    Netpbm img;
    img.kind = bytes[1];
    HeaderReader reader(bytes);
    reader.advance(2);
    img.width = reader.read_int(img.comments, "width");
    img.height = reader.read_int(img.comments, "height");
    img.maxval = reader.read_int(img.comments, "maxval");
    if (img.width <= 0 || img.height <= 0) throw ParseError("netpbm: empty raster", reader.pos());
    if (img.maxval <= 0 || img.maxval > 65535) throw ParseError("netpbm: maxval out of range", reader.pos());
    if (reader.pos() >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[reader.pos()]))) {
        throw ParseError("netpbm: missing whitespace after maxval", reader.pos());
    }
    reader.advance(1);

    const int channels = img.kind == '6' ? 3 : 1;
    const std::size_t bytes_per_sample = img.maxval > 255 ? 2 : 1;
    const std::size_t count = static_cast<std::size_t>(img.width) * img.height * channels;
    const std::size_t data_start = reader.pos();
    if (bytes.size() - data_start < count * bytes_per_sample) {
        throw ParseError("netpbm: truncated raster, expected " + std::to_string(count * bytes_per_sample) + " bytes",
                         bytes.size());
    }
    img.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t off = data_start + i * bytes_per_sample;
        std::uint16_t v = static_cast<unsigned char>(bytes[off]);
        if (bytes_per_sample == 2) v = static_cast<std::uint16_t>((v << 8) | static_cast<unsigned char>(bytes[off + 1]));
        if (v > img.maxval) throw ParseError("netpbm: sample exceeds maxval", off);
        img.samples[i] = v;
    }
    return img;
}

std::string encode_netpbm(const Netpbm& img) {
    std::ostringstream out;
    out << 'P' << img.kind << '\n';
    for (const auto& c : img.comments) out << "# " << c << '\n';
    out << img.width << ' ' << img.height << '\n' << img.maxval << '\n';
    std::string header = out.str();
    const bool wide = img.maxval > 255;
    header.reserve(header.size() + img.samples.size() * (wide ? 2 : 1));
    for (std::uint16_t v : img.samples) {
        if (wide) header.push_back(static_cast<char>(v >> 8));
        header.push_back(static_cast<char>(v & 0xff));
    }
    return header;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

std::string digest(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double v) {
    if (v == 0.0) return "0";  // also folds -0
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string Provenance::line() const {
    std::ostringstream out;
    out << kToolVersion << " subcommand=" << subcommand << " seed=" << seed;
    for (const auto& [name, dig] : inputs) out << " input:" << name << '=' << dig;
    return out.str();
}

}  // namespace wheelplan::io
