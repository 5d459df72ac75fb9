#ifndef SUBSEG_SUBSEG_HPP
#define SUBSEG_SUBSEG_HPP

#include "subseg/baseline.hpp"
#include "subseg/corpus_io.hpp"
#include "subseg/emprune.hpp"
#include "subseg/errors.hpp"
#include "subseg/evaluation.hpp"
#include "subseg/lattice.hpp"
#include "subseg/model.hpp"
#include "subseg/numeric.hpp"
#include "subseg/prior.hpp"
#include "subseg/seed.hpp"
#include "subseg/utf8.hpp"

#endif
