#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stitchfold/exportio.hpp"

namespace stitchfold {

struct RasterImage {
    int width = 0, height = 0;
    std::vector<std::uint8_t> rgb;  // 3 bytes/px, rows top to bottom

    std::uint8_t* px(int x, int y) { return rgb.data() + 3 * (std::size_t(y) * width + x); }
    const std::uint8_t* px(int x, int y) const {
        return rgb.data() + 3 * (std::size_t(y) * width + x);
    }
};

// Preview raster of the plan, drawn with the same palette and z-order as
// the vector output: white sheet, hoop windows in light grey, cut layer,
// then each hoop's threads and needle points. px_per_mm is clamped so the
// longer side stays under ~12000 px.
RasterImage render_plan(const FabPlan& fab, const HoopPlan& hoops, const StitchProgram& prog,
                        double px_per_mm = 4.0);

// 8-bit RGB PNG, one zlib-compressed IDAT. Same image bytes in, same file
// bytes out.
void write_png(const RasterImage& img, const std::string& path);

// read_svg + render_plan + write_png.
void render_svg_file(const std::string& svg_path, const std::string& png_path,
                     double px_per_mm = 4.0);

}  // namespace stitchfold
