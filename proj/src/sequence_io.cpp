#include "scaleseg/sequence_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "scaleseg/errors.hpp"

namespace scaleseg {

namespace fs = std::filesystem;
using nlohmann::json;

std::string frame_name(int t) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%05d", t);
    return buf;
}

namespace {

// Reads a PNM header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& is, const std::string& file) {
    std::string tok;
    int c;
    while ((c = is.get()) != EOF) {
        if (c == '#') {
            while ((c = is.get()) != EOF && c != '\n') {}
            continue;
        }
        if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            while ((c = is.get()) != EOF && !std::isspace(c)) tok.push_back(static_cast<char>(c));
            return tok;
        }
    }
    throw IoError("truncated PNM header: " + file);
}

void pnm_dims(std::istream& is, const std::string& file, int& w, int& h) {
    try {
        w = std::stoi(pnm_token(is, file));
        h = std::stoi(pnm_token(is, file));
        int maxval = std::stoi(pnm_token(is, file));
        if (maxval != 255) throw IoError("unsupported PNM maxval in " + file);
    } catch (const std::invalid_argument&) {
        throw IoError("malformed PNM header: " + file);
    }
    if (w < 1 || h < 1) throw IoError("malformed PNM extents: " + file);
}

}  // namespace

void write_ppm(const fs::path& file, const Image& img) {
    if (img.channels != 3) throw std::invalid_argument("write_ppm: image must have 3 channels");
    std::ofstream os(file, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + file.string());
    os << "P6\n" << img.w << " " << img.h << "\n255\n";
    std::vector<std::uint8_t> row(static_cast<std::size_t>(img.w) * 3);
    for (int y = 0; y < img.h; ++y) {
        for (int x = 0; x < img.w; ++x)
            for (int c = 0; c < 3; ++c)
                row[static_cast<std::size_t>(x) * 3 + c] = static_cast<std::uint8_t>(
                    std::lround(std::clamp(img.at(c, y, x), 0.0, 1.0) * 255.0));
        os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!os) throw IoError("failed writing: " + file.string());
}

Image read_ppm(const fs::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw IoError("cannot open: " + file.string());
    std::string magic = pnm_token(is, file.string());
    if (magic != "P6") throw IoError("not a binary PPM (magic '" + magic + "'): " + file.string());
    int w = 0, h = 0;
    pnm_dims(is, file.string(), w, h);
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * h * 3);
    if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
        throw IoError("truncated PPM payload: " + file.string());
    Image img = make_image(3, h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                img.at(c, y, x) = raw[(static_cast<std::size_t>(y) * w + x) * 3 + c] / 255.0;
    return img;
}

void write_pgm(const fs::path& file, const Mask& mask, bool binary_export) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + file.string());
    os << "P5\n" << mask.w << " " << mask.h << "\n255\n";
    std::vector<std::uint8_t> row(static_cast<std::size_t>(mask.w));
    for (int y = 0; y < mask.h; ++y) {
        for (int x = 0; x < mask.w; ++x) {
            int v = mask.at(y, x);
            if (v < 0 || v > 254)
                throw std::invalid_argument("write_pgm: label out of range: " + std::to_string(v));
            row[static_cast<std::size_t>(x)] =
                binary_export ? (v ? 255 : 0) : static_cast<std::uint8_t>(v);
        }
        os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!os) throw IoError("failed writing: " + file.string());
}

Mask read_pgm(const fs::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw IoError("cannot open: " + file.string());
    std::string magic = pnm_token(is, file.string());
    if (magic != "P5") throw IoError("not a binary PGM (magic '" + magic + "'): " + file.string());
    int w = 0, h = 0;
    pnm_dims(is, file.string(), w, h);
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * h);
    if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
        throw IoError("truncated PGM payload: " + file.string());
    Mask mask = make_mask(h, w);
    for (std::size_t i = 0; i < raw.size(); ++i)
        mask.labels[i] = raw[i] == 255 ? 1 : raw[i];
    return mask;
}

void write_pgm_bytes(const fs::path& file, int h, int w, const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() != static_cast<std::size_t>(h) * w)
        throw std::invalid_argument("write_pgm_bytes: size mismatch");
    std::ofstream os(file, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + file.string());
    os << "P5\n" << w << " " << h << "\n255\n";
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("failed writing: " + file.string());
}

void save_sequence(const VideoSequence& seq, const fs::path& dir) {
    validate_sequence(seq);
    std::error_code ec;
    fs::create_directories(dir / "frames", ec);
    fs::create_directories(dir / "masks", ec);
    if (ec) throw IoError("cannot create sequence directory: " + dir.string());
    const bool binary = seq.object_count == 1;
    for (std::size_t t = 0; t < seq.frames.size(); ++t) {
        write_ppm(dir / "frames" / (frame_name(static_cast<int>(t)) + ".ppm"), seq.frames[t]);
        if (seq.masks[t])
            write_pgm(dir / "masks" / (frame_name(static_cast<int>(t)) + ".pgm"), *seq.masks[t],
                      binary);
    }
    json manifest;
    manifest["id"] = seq.id;
    manifest["frame_count"] = seq.frames.size();
    manifest["object_count"] = seq.object_count;
    manifest["width"] = seq.frames[0].w;
    manifest["height"] = seq.frames[0].h;
    std::ofstream os(dir / "manifest.json");
    if (!os) throw IoError("cannot write manifest in: " + dir.string());
    os << manifest.dump(2) << "\n";
}

namespace {

json load_manifest(const fs::path& dir) {
    std::ifstream is(dir / "manifest.json");
    if (!is) throw IoError("no sequence manifest in: " + dir.string());
    json m;
    try {
        is >> m;
    } catch (const json::exception& e) {
        throw IoError("malformed manifest in " + dir.string() + ": " + e.what());
    }
    return m;
}

}  // namespace

VideoSequence load_sequence(const fs::path& dir) {
    json m = load_manifest(dir);
    VideoSequence seq;
    seq.id = m.value("id", dir.filename().string());
    seq.object_count = m.value("object_count", 1);
    const int count = m.value("frame_count", 0);
    if (count < 1) throw IoError("manifest with no frames in: " + dir.string());
    for (int t = 0; t < count; ++t) {
        seq.frames.push_back(read_ppm(dir / "frames" / (frame_name(t) + ".ppm")));
        fs::path mp = dir / "masks" / (frame_name(t) + ".pgm");
        if (fs::exists(mp))
            seq.masks.emplace_back(read_pgm(mp));
        else
            seq.masks.emplace_back(std::nullopt);
    }
    if (!seq.masks[0])
        throw IoError("sequence '" + seq.id + "' is missing the first-frame mask: " +
                      (dir / "masks" / "00000.pgm").string());
    validate_sequence(seq);
    return seq;
}

SequenceInput load_sequence_input(const fs::path& dir) {
    // Frames plus the first mask only; later ground truth stays on disk.
    json m = load_manifest(dir);
    SequenceInput in;
    in.id = m.value("id", dir.filename().string());
    in.object_count = m.value("object_count", 1);
    const int count = m.value("frame_count", 0);
    if (count < 1) throw IoError("manifest with no frames in: " + dir.string());
    for (int t = 0; t < count; ++t)
        in.frames.push_back(read_ppm(dir / "frames" / (frame_name(t) + ".ppm")));
    fs::path mp = dir / "masks" / "00000.pgm";
    if (!fs::exists(mp))
        throw IoError("sequence '" + in.id + "' is missing the first-frame mask: " + mp.string());
    in.first_mask = read_pgm(mp);
    if (in.first_mask.h != in.frames[0].h || in.first_mask.w != in.frames[0].w)
        throw IoError("sequence '" + in.id + "': mask extent differs from frames");
    return in;
}

std::vector<fs::path> list_sequence_dirs(const fs::path& root) {
    if (!fs::is_directory(root)) throw IoError("not a directory: " + root.string());
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && fs::exists(e.path() / "manifest.json")) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

void write_map(const fs::path& file, int h, int w, const std::vector<double>& values) {
    if (values.size() != static_cast<std::size_t>(h) * w)
        throw std::invalid_argument("write_map: size mismatch");
    std::ofstream os(file, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + file.string());
    os << "SSEGMAP1\n" << h << " " << w << "\n";
    os.write(reinterpret_cast<const char*>(values.data()),
             static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!os) throw IoError("failed writing: " + file.string());
}

std::vector<double> read_map(const fs::path& file, int& h, int& w) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw IoError("cannot open: " + file.string());
    std::string magic;
    std::getline(is, magic);
    if (magic != "SSEGMAP1") throw IoError("not a map file: " + file.string());
    std::string dims;
    std::getline(is, dims);
    std::istringstream ds(dims);
    if (!(ds >> h >> w) || h < 1 || w < 1) throw IoError("malformed map header: " + file.string());
    std::vector<double> values(static_cast<std::size_t>(h) * w);
    if (!is.read(reinterpret_cast<char*>(values.data()),
                 static_cast<std::streamsize>(values.size() * sizeof(double))))
        throw IoError("truncated map payload: " + file.string());
    return values;
}

}  // namespace scaleseg
