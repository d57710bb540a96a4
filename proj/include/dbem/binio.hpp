#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "dbem/types.hpp"

namespace dbem {

// FNV-1a over a byte stream.
class Fnv64 {
public:
    void feed(const void* data, size_t len)
    {
        const auto* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < len; ++i) {
            h_ ^= p[i];
            h_ *= 1099511628211ull;
        }
    }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 1469598103934665603ull;
};

// Binary writer to path.tmp, renamed into place on commit(); every byte feeds a checksum
// that commit() appends.
class BinaryWriter {
public:
    explicit BinaryWriter(const std::string& path) : path_(path), tmp_(path + ".tmp"), out_(tmp_, std::ios::binary)
    {
        if (!out_) throw io_error("cannot open " + tmp_);
    }
    void bytes(const void* data, size_t len)
    {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
        sum_.feed(data, len);
    }
    template <class T>
    void put(const T& v)
    {
        bytes(&v, sizeof v);
    }
    void matrix(const CMat& m)
    {
        put(static_cast<std::int64_t>(m.rows()));
        put(static_cast<std::int64_t>(m.cols()));
        bytes(m.data(), sizeof(cd) * static_cast<size_t>(m.size()));
    }
    void commit()
    {
        const std::uint64_t s = sum_.value();
        out_.write(reinterpret_cast<const char*>(&s), sizeof s);
        out_.close();
        if (!out_) throw io_error("write failed for " + tmp_);
        if (std::rename(tmp_.c_str(), path_.c_str()) != 0) throw io_error("rename failed for " + path_);
    }

private:
    std::string path_, tmp_;
    std::ofstream out_;
    Fnv64 sum_;
};

class BinaryReader {
public:
    explicit BinaryReader(const std::string& path) : path_(path), in_(path, std::ios::binary)
    {
        if (!in_) throw io_error("cannot open " + path);
    }
    void bytes(void* data, size_t len)
    {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
        if (!in_) throw io_error("truncated file " + path_);
        sum_.feed(data, len);
    }
    template <class T>
    T get()
    {
        T v;
        bytes(&v, sizeof v);
        return v;
    }
    CMat matrix(std::int64_t max_dim = 100000)
    {
        const auto rows = get<std::int64_t>(), cols = get<std::int64_t>();
        if (rows < 0 || cols < 0 || rows > max_dim || cols > max_dim) throw io_error("corrupt shape in " + path_);
        CMat m(rows, cols);
        bytes(m.data(), sizeof(cd) * static_cast<size_t>(m.size()));
        return m;
    }
    // Reads the trailing checksum and compares it with the bytes consumed so far.
    void verify()
    {
        std::uint64_t s = 0;
        in_.read(reinterpret_cast<char*>(&s), sizeof s);
        if (!in_) throw io_error("missing checksum in " + path_);
        if (s != sum_.value()) throw io_error("checksum mismatch in " + path_ + " (file modified)");
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ifstream in_;
    Fnv64 sum_;
};

}  // namespace dbem
