#ifndef WAVGUARD_WAVGUARD_HPP
#define WAVGUARD_WAVGUARD_HPP

#include "wavguard/cssd.hpp"
#include "wavguard/envelope.hpp"
#include "wavguard/fft.hpp"
#include "wavguard/io.hpp"
#include "wavguard/lpc.hpp"
#include "wavguard/lpcdc.hpp"
#include "wavguard/pipeline.hpp"
#include "wavguard/sampler.hpp"
#include "wavguard/signal.hpp"
#include "wavguard/simulator.hpp"
#include "wavguard/wav.hpp"
#include "wavguard/wavenet.hpp"

#endif  // WAVGUARD_WAVGUARD_HPP
