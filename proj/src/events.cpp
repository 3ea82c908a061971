#include "ldlif/events.hpp"

#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "ldlif/binary_io.hpp"
#include "ldlif/error.hpp"

namespace ldlif {

namespace {

constexpr char kEventMagic[5] = "LDLF";
constexpr char kDatasetMagic[5] = "LDLS";

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path.string());
    return is;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot create " + path.string());
    return os;
}

}  // namespace

void SpikeEventFile::validate() const {
    if (version != kEventFileVersion) throw FormatError("unsupported event file version " + std::to_string(version));
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (e.timestep >= timestep_count || e.neuron >= neuron_count)
            throw ValidationError("event " + std::to_string(i) + " out of range (t=" + std::to_string(e.timestep) +
                                  ", id=" + std::to_string(e.neuron) + ")");
        if (i > 0 && !(events[i - 1] < e))
            throw ValidationError("event " + std::to_string(i) + " is unsorted or duplicated");
    }
}

SpikeTrain SpikeEventFile::densify() const {
    validate();
    SpikeTrain train(timestep_count, SpikeVector(neuron_count, 0));
    for (const auto& e : events) train[e.timestep][e.neuron] = 1;
    return train;
}

SpikeEventFile SpikeEventFile::from_train(const SpikeTrain& train) {
    SpikeEventFile f;
    f.timestep_count = static_cast<std::uint32_t>(train.size());
    f.neuron_count = train.empty() ? 0 : static_cast<std::uint32_t>(train.front().size());
    for (std::uint32_t t = 0; t < f.timestep_count; ++t) {
        if (train[t].size() != f.neuron_count) throw ShapeError("spike train rows differ in width");
        for (std::uint32_t n = 0; n < f.neuron_count; ++n)
            if (train[t][n]) f.events.push_back({t, n});
    }
    return f;
}

SpikeEventFile read_event_file(std::istream& is) {
    if (!bin::check_magic(is, kEventMagic)) throw FormatError("bad magic: not an LDLF event file");
    SpikeEventFile f;
    f.version = bin::get_u32(is);
    if (f.version != kEventFileVersion) throw FormatError("unsupported event file version " + std::to_string(f.version));
    f.neuron_count = bin::get_u32(is);
    f.timestep_count = bin::get_u32(is);
    unsigned char buf[8];
    auto le32 = [](const unsigned char* p) {
        return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 | std::uint32_t{p[3]} << 24;
    };
    while (is.read(reinterpret_cast<char*>(buf), 8)) f.events.push_back({le32(buf), le32(buf + 4)});
    if (is.gcount() != 0) throw FormatError("event file ends inside an event record");
    f.validate();
    return f;
}

void write_event_file(std::ostream& os, const SpikeEventFile& f) {
    f.validate();
    bin::put_magic(os, kEventMagic);
    bin::put_u32(os, f.version);
    bin::put_u32(os, f.neuron_count);
    bin::put_u32(os, f.timestep_count);
    for (const auto& e : f.events) {
        bin::put_u32(os, e.timestep);
        bin::put_u32(os, e.neuron);
    }
    if (!os) throw FormatError("failed writing event file");
}

SpikeTrain load_events(const std::filesystem::path& path) {
    auto is = open_in(path);
    return read_event_file(is).densify();
}

void save_events(const std::filesystem::path& path, const SpikeTrain& train) {
    auto os = open_out(path);
    write_event_file(os, SpikeEventFile::from_train(train));
}

Dataset read_dataset(std::istream& is) {
    if (!bin::check_magic(is, kDatasetMagic)) throw FormatError("bad magic: not an LDLS dataset file");
    const std::uint32_t version = bin::get_u32(is);
    if (version != kDatasetFileVersion) throw FormatError("unsupported dataset version " + std::to_string(version));
    const std::uint32_t count = bin::get_u32(is);
    Dataset data;
    data.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        LabeledSample s;
        s.label = static_cast<int>(bin::get_u32(is));
        const std::uint64_t len = bin::get_u64(is);
        std::string blob(len, '\0');
        if (!is.read(blob.data(), static_cast<std::streamsize>(len)))
            throw FormatError("dataset truncated in sample " + std::to_string(i));
        std::istringstream sub(blob);
        s.input = read_event_file(sub).densify();
        data.push_back(std::move(s));
    }
    return data;
}

void write_dataset(std::ostream& os, const Dataset& data) {
    bin::put_magic(os, kDatasetMagic);
    bin::put_u32(os, kDatasetFileVersion);
    bin::put_u32(os, static_cast<std::uint32_t>(data.size()));
    for (const auto& s : data) {
        std::ostringstream blob;
        write_event_file(blob, SpikeEventFile::from_train(s.input));
        const std::string bytes = blob.str();
        bin::put_u32(os, static_cast<std::uint32_t>(s.label));
        bin::put_u64(os, bytes.size());
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    if (!os) throw FormatError("failed writing dataset");
}

Dataset load_dataset(const std::filesystem::path& path) {
    auto is = open_in(path);
    return read_dataset(is);
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
    auto os = open_out(path);
    write_dataset(os, data);
}

void describe_event_file(std::ostream& out, const std::filesystem::path& path) {
    auto is = open_in(path);
    char magic[4];
    if (!is.read(magic, 4)) throw FormatError("file too short for a header");
    is.seekg(0);
    if (std::string(magic, 4) == kEventMagic) {
        const SpikeEventFile f = read_event_file(is);
        const double cells = static_cast<double>(f.neuron_count) * f.timestep_count;
        out << "format: LDLF v" << f.version << '\n'
            << "neurons: " << f.neuron_count << '\n'
            << "timesteps: " << f.timestep_count << '\n'
            << "events: " << f.events.size() << '\n'
            << "density: " << (cells > 0 ? static_cast<double>(f.events.size()) / cells : 0.0) << '\n';
        return;
    }
    const Dataset data = read_dataset(is);
    std::map<int, std::size_t> per_label;
    std::size_t events = 0;
    for (const auto& s : data) {
        ++per_label[s.label];
        for (const auto& row : s.input)
            for (auto b : row) events += b;
    }
    out << "format: LDLS v" << kDatasetFileVersion << '\n' << "samples: " << data.size() << '\n';
    if (!data.empty())
        out << "neurons: " << (data.front().input.empty() ? 0 : data.front().input.front().size()) << '\n'
            << "timesteps: " << data.front().input.size() << '\n';
    out << "events: " << events << '\n';
    for (const auto& [label, n] : per_label) out << "label " << label << ": " << n << '\n';
}

}  // namespace ldlif
