#include "wheelplan/scene.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "kdtree.hpp"
#include "wheelplan/errors.hpp"
#include "wheelplan/io.hpp"

namespace wheelplan {

namespace {

// Optical frame (x right, y down, z forward) -> body axes (x forward, y left, z up).
Vec3 optical_to_body_axes(Vec3 q) { return {q.z, -q.x, -q.y}; }
Vec3 body_to_optical_axes(Vec3 q) { return {-q.y, -q.z, q.x}; }

Vec3 mat_mul(const std::array<double, 9>& m, Vec3 v) {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

Vec3 mat_t_mul(const std::array<double, 9>& m, Vec3 v) {
    return {m[0] * v.x + m[3] * v.y + m[6] * v.z, m[1] * v.x + m[4] * v.y + m[7] * v.z,
            m[2] * v.x + m[5] * v.y + m[8] * v.z};
}

}  // namespace

CameraModel CameraModel::default_model() {
    CameraModel cam;
    cam.width = kWorkingWidth;
    cam.height = kWorkingHeight;
    cam.horizontal_fov = deg2rad(86.0);
    cam.cx = 160.0;
    cam.cy = 112.0;
    cam.fx = cam.cx / std::tan(cam.horizontal_fov / 2.0);
    cam.fy = cam.fx;
    cam.max_range = 10.0;
    const double pitch = deg2rad(15.0);  // nose down about body +y
    cam.rotation = {std::cos(pitch), 0.0, std::sin(pitch), 0.0, 1.0, 0.0, -std::sin(pitch), 0.0, std::cos(pitch)};
    cam.translation = {0.0, 0.0, 1.0};
    return cam;
}

void CameraModel::validate() const {
    auto fail = [](const std::string& what) { throw ContractViolation("camera: " + what); };
    if (!(fx > 0.0) || !(fy > 0.0)) fail("focal lengths must be positive");
    if (width <= 0 || height <= 0) fail("image size must be positive");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) fail("principal point outside image");
    if (!(horizontal_fov > 0.0 && horizontal_fov < std::numbers::pi)) fail("horizontal_fov must lie in (0, pi)");
    if (!(max_range > 0.0)) fail("max_range must be positive");
    // Rotation must be orthonormal.
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double d = 0.0;
            for (int k = 0; k < 3; ++k) d += rotation[i * 3 + k] * rotation[j * 3 + k];
            if (std::abs(d - (i == j ? 1.0 : 0.0)) > 1e-6) fail("extrinsic rotation is not orthonormal");
        }
    }
}

Vec3 CameraModel::camera_to_body(Vec3 q) const {
    const Vec3 r = mat_mul(rotation, optical_to_body_axes(q));
    return {r.x + translation.x, r.y + translation.y, r.z + translation.z};
}

Vec3 CameraModel::body_to_camera(Vec3 q) const {
    const Vec3 local = mat_t_mul(rotation, {q.x - translation.x, q.y - translation.y, q.z - translation.z});
    return body_to_optical_axes(local);
}

std::optional<Vec2> CameraModel::project(Vec3 q) const {
    if (!(q.z > 1e-9)) return std::nullopt;
    return Vec2{fx * q.x / q.z + cx, fy * q.y / q.z + cy};
}

Vec3 CameraModel::backproject(double u, double v, double depth) const {
    return {(u - cx) * depth / fx, (v - cy) * depth / fy, depth};
}

CameraModel CameraModel::scaled_to(int new_width, int new_height) const {
    CameraModel out = *this;
    const double sx = static_cast<double>(new_width) / width;
    const double sy = static_cast<double>(new_height) / height;
    out.width = new_width;
    out.height = new_height;
    // Pixel centers sit at integer coordinates, so the principal point maps with a half-pixel offset.
    out.fx = fx * sx;
    out.cx = (cx + 0.5) * sx - 0.5;
    out.fy = fy * sy;
    out.cy = (cy + 0.5) * sy - 0.5;
    return out;
}

PointCloud backproject(const DepthImage& depth, const SemanticImage& semantic, const CameraModel& cam) {
    if (depth.width != cam.width || depth.height != cam.height || semantic.width != cam.width ||
        semantic.height != cam.height) {
        throw ContractViolation("backproject: image dimensions do not match the camera");
    }
    PointCloud pc;
    pc.frame = Frame::Camera;
    for (int v = 0; v < depth.height; ++v) {
        for (int u = 0; u < depth.width; ++u) {
            const double d = depth.at(u, v);
            if (!(d > 0.0) || d > cam.max_range) continue;
            pc.points.push_back({cam.backproject(u, v, d), semantic.at(u, v)});
        }
    }
    return pc;
}

OutlierFilterResult filter_outliers(const PointCloud& pc, int k, double std_mult) {
    if (k < 1) throw ContractViolation("filter_outliers: k must be >= 1");
    if (!(std_mult > 0.0)) throw ContractViolation("filter_outliers: std_mult must be positive");
    OutlierFilterResult result;
    if (pc.size() <= static_cast<std::size_t>(k)) {
        result.cloud = pc;
        result.too_small = true;
        return result;
    }
    std::vector<std::array<double, 3>> pts;
    pts.reserve(pc.size());
    for (const auto& p : pc.points) pts.push_back({p.position.x, p.position.y, p.position.z});
    const detail::KdTree<3> tree(pts);

    std::vector<double> mean_dist(pts.size());
    KahanSum sum;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        KahanSum local;
        for (double d2 : tree.knn_sq_excluding(i, static_cast<std::size_t>(k))) local += std::sqrt(d2);
        mean_dist[i] = local.value() / k;
        sum += mean_dist[i];
    }
    const double n = static_cast<double>(pts.size());
    const double mean = sum.value() / n;
    KahanSum sq;
    for (double d : mean_dist) sq += (d - mean) * (d - mean);
    const double stddev = std::sqrt(sq.value() / (n - 1.0));
    const double threshold = mean + std_mult * stddev;

    result.cloud.frame = pc.frame;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (mean_dist[i] > threshold) {
            ++result.removed;
        } else {
            result.cloud.points.push_back(pc.points[i]);
        }
    }
    return result;
}

PointCloud filter_outliers_per_class(const PointCloud& pc, int k, double std_mult) {
    PointCloud drivable{pc.frame, {}}, obstacle{pc.frame, {}};
    PointCloud out{pc.frame, {}};
    for (const auto& p : pc.points) {
        if (p.label == SemanticClass::Drivable) {
            drivable.points.push_back(p);
        } else if (p.label == SemanticClass::Obstacle) {
            obstacle.points.push_back(p);
        } else {
            out.points.push_back(p);
        }
    }
    for (const PointCloud* part : {&drivable, &obstacle}) {
        if (part->empty()) continue;
        auto filtered = filter_outliers(*part, k, std_mult);
        out.points.insert(out.points.end(), filtered.cloud.points.begin(), filtered.cloud.points.end());
    }
    return out;
}

// --- loaders -----------------------------------------------------------------

DepthImage downsample_depth(const DepthImage& img, int width, int height) {
    DepthImage out(width, height, 0.0);
    for (int v = 0; v < height; ++v) {
        const int v0 = static_cast<int>(static_cast<long>(v) * img.height / height);
        const int v1 = std::max(v0 + 1, static_cast<int>(static_cast<long>(v + 1) * img.height / height));
        for (int u = 0; u < width; ++u) {
            const int u0 = static_cast<int>(static_cast<long>(u) * img.width / width);
            const int u1 = std::max(u0 + 1, static_cast<int>(static_cast<long>(u + 1) * img.width / width));
            KahanSum sum;
            int valid = 0;
            for (int y = v0; y < v1; ++y) {
                for (int x = u0; x < u1; ++x) {
                    const double d = img.at(x, y);
                    if (d > 0.0) {
                        sum += d;
                        ++valid;
                    }
                }
            }
            out.at(u, v) = valid > 0 ? sum.value() / valid : 0.0;
        }
    }
    return out;
}

SemanticImage downsample_semantic(const SemanticImage& img, int width, int height) {
    SemanticImage out(width, height, SemanticClass::Unknown);
    for (int v = 0; v < height; ++v) {
        const int sy = std::min(img.height - 1, static_cast<int>((v + 0.5) * img.height / height));
        for (int u = 0; u < width; ++u) {
            const int sx = std::min(img.width - 1, static_cast<int>((u + 0.5) * img.width / width));
            out.at(u, v) = img.at(sx, sy);
        }
    }
    return out;
}

namespace {

std::pair<int, int> working_size(int w, int h) {
    return {std::min(w, kWorkingWidth), std::min(h, kWorkingHeight)};
}

}  // namespace

DepthImage load_depth(const std::filesystem::path& path) {
    const std::string bytes = io::read_file(path);
    const io::Netpbm pgm = io::parse_netpbm(bytes);
    if (pgm.kind != '5' || pgm.maxval <= 255) {
        throw ParseError("depth image must be a 16-bit graymap", 1);
    }
    double scale = -1.0;
    for (const auto& c : pgm.comments) {
        std::istringstream in(c);
        std::string key;
        in >> key;
        if (key == "depth-scale") {
            if (!(in >> scale) || !(scale > 0.0)) {
                throw ParseError("depth-scale comment is malformed", bytes.find("depth-scale"));
            }
        }
    }
    if (scale < 0.0) throw ParseError("missing '# depth-scale <meters-per-unit>' header comment", 0);
    DepthImage img(pgm.width, pgm.height, 0.0);
    for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = pgm.samples[i] * scale;
    const auto [w, h] = working_size(img.width, img.height);
    if (w != img.width || h != img.height) return downsample_depth(img, w, h);
    return img;
}

SemanticImage load_semantic(const std::filesystem::path& path) {
    const std::string bytes = io::read_file(path);
    const io::Netpbm pgm = io::parse_netpbm(bytes);
    if (pgm.kind != '5' || pgm.maxval > 255) throw ParseError("semantic image must be an 8-bit graymap", 1);
    SemanticImage img(pgm.width, pgm.height, SemanticClass::Unknown);
    const std::size_t data_start = bytes.size() - pgm.samples.size();
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const auto code = pgm.samples[i];
        if (code > 2) throw ParseError("semantic code " + std::to_string(code) + " is not one of 0/1/2", data_start + i);
        img.data[i] = static_cast<SemanticClass>(code);
    }
    const auto [w, h] = working_size(img.width, img.height);
    if (w != img.width || h != img.height) return downsample_semantic(img, w, h);
    return img;
}

std::string encode_depth(const DepthImage& img, double scale, const std::vector<std::string>& comments) {
    if (!(scale > 0.0)) throw ContractViolation("depth scale must be positive");
    io::Netpbm pgm{'5', img.width, img.height, 65535, comments, {}};
    pgm.comments.push_back("depth-scale " + io::format_double(scale));
    pgm.samples.reserve(img.data.size());
    for (double d : img.data) {
        const double units = d > 0.0 ? std::round(d / scale) : 0.0;
        pgm.samples.push_back(static_cast<std::uint16_t>(std::clamp(units, 0.0, 65535.0)));
    }
    return io::encode_netpbm(pgm);
}

std::string encode_semantic(const SemanticImage& img, const std::vector<std::string>& comments) {
    io::Netpbm pgm{'5', img.width, img.height, 255, comments, {}};
    pgm.samples.reserve(img.data.size());
    for (SemanticClass c : img.data) pgm.samples.push_back(static_cast<std::uint16_t>(c));
    return io::encode_netpbm(pgm);
}

CameraModel parse_camera(const std::string& text) {
    std::map<std::string, std::pair<std::vector<double>, std::size_t>> kv;
    std::size_t offset = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t line_offset = offset;
        offset += line.size() + 1;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos) throw ParseError("camera config: expected key=value", line_offset);
        std::string key = line.substr(0, eq);
        key.erase(0, key.find_first_not_of(" \t"));
        key.erase(key.find_last_not_of(" \t") + 1);
        std::istringstream values(line.substr(eq + 1));
        std::vector<double> nums;
        double v;
        while (values >> v) nums.push_back(v);
        if (!values.eof()) throw ParseError("camera config: non-numeric value for '" + key + "'", line_offset + eq + 1);
        kv[key] = {nums, line_offset};
    }
    auto scalar = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParseError("camera config: missing key '" + key + "'", text.size());
        if (it->second.first.size() != 1) throw ParseError("camera config: '" + key + "' expects one value", it->second.second);
        return it->second.first[0];
    };
    CameraModel cam;
    cam.fx = scalar("fx");
    cam.fy = scalar("fy");
    cam.cx = scalar("cx");
    cam.cy = scalar("cy");
    cam.width = static_cast<int>(scalar("width"));
    cam.height = static_cast<int>(scalar("height"));
    cam.horizontal_fov = deg2rad(scalar("hfov_deg"));
    cam.max_range = scalar("max_range_m");
    if (auto it = kv.find("rotation"); it != kv.end()) {
        if (it->second.first.size() != 9) throw ParseError("camera config: rotation expects 9 values", it->second.second);
        std::copy(it->second.first.begin(), it->second.first.end(), cam.rotation.begin());
    }
    if (auto it = kv.find("translation"); it != kv.end()) {
        if (it->second.first.size() != 3) throw ParseError("camera config: translation expects 3 values", it->second.second);
        cam.translation = {it->second.first[0], it->second.first[1], it->second.first[2]};
    }
    try {
        cam.validate();
    } catch (const ContractViolation& e) {
        throw ParseError(e.what(), 0);
    }
    return cam;
}

std::string format_camera(const CameraModel& cam) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "fx = " << cam.fx << "\nfy = " << cam.fy << "\ncx = " << cam.cx << "\ncy = " << cam.cy
        << "\nwidth = " << cam.width << "\nheight = " << cam.height << "\nhfov_deg = " << rad2deg(cam.horizontal_fov)
        << "\nmax_range_m = " << cam.max_range << "\nrotation =";
    for (double r : cam.rotation) out << ' ' << r;
    out << "\ntranslation = " << cam.translation.x << ' ' << cam.translation.y << ' ' << cam.translation.z << '\n';
    return out.str();
}

CameraModel load_camera(const std::filesystem::path& path) {
    CameraModel cam = parse_camera(io::read_file(path));
    const auto [w, h] = working_size(cam.width, cam.height);
    if (w != cam.width || h != cam.height) cam = cam.scaled_to(w, h);
    return cam;
}

}  // namespace wheelplan
