#pragma once

#include <vector>

#include "scaleseg/tensor.hpp"

namespace scaleseg {

// Dense row-major image, intensities normalized to [0, 1].
struct Image {
    int channels = 0;
    int h = 0;
    int w = 0;
    std::vector<double> data;  // (c, y, x) row-major

    double at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * h + y) * w + x];
    }
    double& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * h + y) * w + x];
    }
    bool operator==(const Image&) const = default;
};

Image make_image(int channels, int h, int w, double fill = 0.0);

// Per-pixel integer labels; 0 is background, k >= 1 is object k.
struct Mask {
    int h = 0;
    int w = 0;
    std::vector<int> labels;

    int at(int y, int x) const { return labels[static_cast<std::size_t>(y) * w + x]; }
    int& at(int y, int x) { return labels[static_cast<std::size_t>(y) * w + x]; }
    bool operator==(const Mask&) const = default;
};

Mask make_mask(int h, int w, int fill = 0);

Tensor image_to_tensor(const Image& img);
Image tensor_to_image(const Tensor& t);

// (1,H,W) tensor holding 1.0 where the mask equals `object`, else 0.0.
Tensor mask_to_fg(const Mask& mask, int object = 1);

// Binary view of a multi-object mask: label 1 where mask == object.
Mask binary_mask(const Mask& mask, int object);

// Per-pixel argmax over channels of a probability map.
Mask argmax_mask(const Tensor& probs);

// Bilinear resize of a plain image (same convention as the tensor op).
Image resize_image(const Image& img, int target_h, int target_w);

}  // namespace scaleseg
