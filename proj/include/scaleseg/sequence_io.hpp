#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scaleseg/video.hpp"

namespace scaleseg {

// Binary PPM (P6) frames and binary PGM (P5) masks. Mask pixel value k is
// object label k with 0 = background; value 255 is the binary-export
// encoding and loads as label 1.
void write_ppm(const std::filesystem::path& file, const Image& img);
Image read_ppm(const std::filesystem::path& file);
void write_pgm(const std::filesystem::path& file, const Mask& mask, bool binary_export);
Mask read_pgm(const std::filesystem::path& file);

// Grayscale PGM from raw bytes (heatmap export).
void write_pgm_bytes(const std::filesystem::path& file, int h, int w,
                     const std::vector<std::uint8_t>& bytes);

// Sequence directory layout:
//   <dir>/frames/%05d.ppm
//   <dir>/masks/%05d.pgm     (00000 mandatory; later ones optional)
//   <dir>/manifest.json      (id, frame_count, object_count, width, height)
void save_sequence(const VideoSequence& seq, const std::filesystem::path& dir);
VideoSequence load_sequence(const std::filesystem::path& dir);
SequenceInput load_sequence_input(const std::filesystem::path& dir);

// Subdirectories of `root` that contain a sequence manifest, sorted by name.
std::vector<std::filesystem::path> list_sequence_dirs(const std::filesystem::path& root);

// Raw double-precision map dump (attention / variance heatmap source data).
void write_map(const std::filesystem::path& file, int h, int w, const std::vector<double>& values);
std::vector<double> read_map(const std::filesystem::path& file, int& h, int& w);

std::string frame_name(int t);  // zero-padded "00000"

}  // namespace scaleseg
