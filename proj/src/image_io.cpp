#include "plnav/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "plnav/error.hpp"

namespace plnav {

namespace {

/// Netpbm header reader that also captures "# max_range" comments.
class HeaderReader {
public:
    explicit HeaderReader(std::istream& in) : in_(in) {}

    std::string token()
    {
        std::string out;
        for (;;) {
            const int ch = in_.get();
            if (ch == EOF)
                break;
            if (ch == '#') {
                std::string comment;
                std::getline(in_, comment);
                std::istringstream cs(comment);
                std::string key;
                double value = 0.0;
                if (cs >> key >> value && key == "max_range")
                    max_range = value;
                if (!out.empty())
                    break;
                continue;
            }
            if (std::isspace(ch)) {
                if (!out.empty())
                    break;
                continue;
            }
            out.push_back(static_cast<char>(ch));
        }
        return out;
    }

    long number(const std::filesystem::path& path)
    {
        const std::string t = token();
        try {
            std::size_t used = 0;
            const long v = std::stol(t, &used);
            if (used != t.size() || v < 0)
                throw std::invalid_argument(t);
            return v;
        } catch (const std::exception&) {
            throw IoError(path.string() + ": malformed netpbm header token '" + t + "'");
        }
    }

    std::optional<double> max_range;

private:
    std::istream& in_;
};

std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    return out;
}

} // namespace

void write_depth_pgm(const std::filesystem::path& path, const DepthFrame& depth)
{
    auto out = open_out(path);
    const auto& g = depth.values;
    out << "P5\n# max_range " << depth.max_range << "\n" << g.cols() << " " << g.rows() << "\n65535\n";
    for (double d : g.data()) {
        const double scaled = std::clamp(d / depth.max_range, 0.0, 1.0) * 65535.0;
        const auto v = static_cast<unsigned>(std::lround(scaled));
        out.put(static_cast<char>((v >> 8) & 0xFF));
        out.put(static_cast<char>(v & 0xFF));
    }
    if (!out)
        throw IoError("failed writing " + path.string());
}

DepthFrame read_depth_pgm(const std::filesystem::path& path, std::optional<double> max_range)
{
    auto in = open_in(path);
    HeaderReader header(in);
    const std::string magic = header.token();
    if (magic != "P5" && magic != "P2")
        throw IoError(path.string() + ": not a PGM file");
    const long w = header.number(path);
    const long h = header.number(path);
    const long maxval = header.number(path);
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
        throw IoError(path.string() + ": invalid PGM dimensions");

    DepthFrame frame;
    frame.max_range = max_range.value_or(header.max_range.value_or(10.0));
    frame.values = Grid<double>(static_cast<std::size_t>(h), static_cast<std::size_t>(w));
    for (double& d : frame.values.data()) {
        long raw = 0;
        if (magic == "P2") {
            if (!(in >> raw))
                throw IoError(path.string() + ": truncated PGM data");
        } else if (maxval > 255) {
            const int hi = in.get();
            const int lo = in.get();
            if (lo == EOF)
                throw IoError(path.string() + ": truncated PGM data");
            raw = (hi << 8) | lo;
        } else {
            const int v = in.get();
            if (v == EOF)
                throw IoError(path.string() + ": truncated PGM data");
            raw = v;
        }
        d = static_cast<double>(raw) / static_cast<double>(maxval) * frame.max_range;
    }
    return frame;
}

void write_mask_pbm(const std::filesystem::path& path, const SemanticMask& mask)
{
    auto out = open_out(path);
    const auto& g = mask.values;
    out << "P4\n" << g.cols() << " " << g.rows() << "\n";
    for (std::size_t r = 0; r < g.rows(); ++r) {
        unsigned char byte = 0;
        int bits = 0;
        for (std::size_t c = 0; c < g.cols(); ++c) {
            byte = static_cast<unsigned char>((byte << 1) | (g(r, c) ? 1 : 0));
            if (++bits == 8) {
                out.put(static_cast<char>(byte));
                byte = 0;
                bits = 0;
            }
        }
        if (bits > 0)
            out.put(static_cast<char>(byte << (8 - bits)));
    }
    if (!out)
        throw IoError("failed writing " + path.string());
}

SemanticMask read_mask_pbm(const std::filesystem::path& path)
{
    auto in = open_in(path);
    HeaderReader header(in);
    const std::string magic = header.token();
    if (magic != "P4" && magic != "P1")
        throw IoError(path.string() + ": not a PBM file");
    const long w = header.number(path);
    const long h = header.number(path);
    if (w <= 0 || h <= 0)
        throw IoError(path.string() + ": invalid PBM dimensions");

    SemanticMask mask;
    mask.values = Grid<std::uint8_t>(static_cast<std::size_t>(h), static_cast<std::size_t>(w));
    for (std::size_t r = 0; r < mask.values.rows(); ++r) {
        if (magic == "P1") {
            for (std::size_t c = 0; c < mask.values.cols(); ++c) {
                char ch = 0;
                do {
                    if (!in.get(ch))
                        throw IoError(path.string() + ": truncated PBM data");
                } while (std::isspace(static_cast<unsigned char>(ch)));
                if (ch != '0' && ch != '1')
                    throw IoError(path.string() + ": invalid PBM pixel");
                mask.values(r, c) = ch == '1' ? 1 : 0;
            }
        } else {
            const std::size_t bytes = (mask.values.cols() + 7) / 8;
            for (std::size_t k = 0; k < bytes; ++k) {
                const int byte = in.get();
                if (byte == EOF)
                    throw IoError(path.string() + ": truncated PBM data");
                for (int bit = 0; bit < 8; ++bit) {
                    const std::size_t c = k * 8 + static_cast<std::size_t>(bit);
                    if (c < mask.values.cols())
                        mask.values(r, c) = (byte >> (7 - bit)) & 1;
                }
            }
        }
    }
    return mask;
}

} // namespace plnav
